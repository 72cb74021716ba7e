/*
 * Copyright 2026 the tagsem authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License"); you may not use this file
 * except in compliance with the License. You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software distributed under the
 * License is distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND,
 * either express or implied. See the License for the specific language governing permissions
 * and limitations under the License.
 */

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <unordered_set>

#include "corpus.hpp"
#include "error.hpp"

using namespace tagsem;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "tagsem_corpus_tests";
  fs::create_directories(dir);
  return dir / name;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

Corpus tiny_corpus() {
  std::vector<Document> docs;
  docs.push_back({"d1", {"a", "b"}});
  docs.push_back({"d2", {"a", "c"}});
  docs.push_back({"d3", {"b", "c", "d"}});
  docs.push_back({"d4", {"d"}});
  docs.push_back({"d5", {"a", "d"}});
  docs.push_back({"d6", {"b"}});
  return make_corpus(std::move(docs));
}

}  // namespace

TEST_SUITE_BEGIN("corpus");

TEST_CASE("load collapses duplicate tags within a document") {
  const auto path = temp_file("dup.jsonl");
  write_file(path, R"({"id":"d1","tags":["a","a","b"]})" "\n");
  const Corpus corpus = load_corpus(path.string());
  REQUIRE(corpus.documents.size() == 1);
  CHECK(corpus.documents[0].tags == std::vector<std::string>{"a", "b"});
  CHECK(corpus.vocabulary == std::vector<std::string>{"a", "b"});
}

TEST_CASE("load preserves document order and sorts the vocabulary") {
  const auto path = temp_file("order.jsonl");
  write_file(path,
             R"({"id":"z","tags":["zebra","apple"]})" "\n"
             R"({"id":"a","tags":["mango"]})" "\n");
  const Corpus corpus = load_corpus(path.string());
  CHECK(corpus.documents[0].id == "z");
  CHECK(corpus.documents[1].id == "a");
  CHECK(corpus.vocabulary == std::vector<std::string>{"apple", "mango", "zebra"});
  CHECK(corpus.tag_index("mango") == 1);
  CHECK(corpus.tag_index("nope") == -1);
}

TEST_CASE("load rejects empty files, malformed lines and bad documents") {
  const auto empty = temp_file("empty.jsonl");
  write_file(empty, "");
  CHECK_THROWS_WITH_AS(load_corpus(empty.string()), doctest::Contains("no documents"), Error);

  const auto malformed = temp_file("malformed.jsonl");
  write_file(malformed, R"({"id":"d1","tags":["a"]})" "\n" "{oops\n");
  try {
    load_corpus(malformed.string());
    FAIL("expected parse error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kParse);
    CHECK(std::string(e.what()).find(":2") != std::string::npos);  // line number
  }

  const auto no_tags = temp_file("notags.jsonl");
  write_file(no_tags, R"({"id":"d1","tags":[]})" "\n");
  CHECK_THROWS_AS(load_corpus(no_tags.string()), Error);

  const auto dup_id = temp_file("dupid.jsonl");
  write_file(dup_id, R"({"id":"d1","tags":["a"]})" "\n" R"({"id":"d1","tags":["b"]})" "\n");
  CHECK_THROWS_WITH_AS(load_corpus(dup_id.string()),
                       doctest::Contains("duplicate document id"), Error);

  CHECK_THROWS_AS(load_corpus("/nonexistent/nowhere.jsonl"), Error);
}

TEST_CASE("loaders are pure: reloading gives a structurally identical corpus") {
  const auto path = temp_file("reload.jsonl");
  save_corpus(tiny_corpus(), path.string());
  const Corpus first = load_corpus(path.string());
  const Corpus second = load_corpus(path.string());
  REQUIRE(first.documents.size() == second.documents.size());
  for (size_t i = 0; i < first.documents.size(); ++i) {
    CHECK(first.documents[i].id == second.documents[i].id);
    CHECK(first.documents[i].tags == second.documents[i].tags);
  }
  CHECK(first.vocabulary == second.vocabulary);
}

TEST_CASE("reserve_oov with zero tags is the identity") {
  const Corpus corpus = tiny_corpus();
  const OovReservation reservation = reserve_oov(corpus, 0, 7);
  CHECK(reservation.reserved_tags.empty());
  CHECK(reservation.oov_document_ids.empty());
}

TEST_CASE("reserve_oov marks exactly the documents containing a reserved tag") {
  const Corpus corpus = tiny_corpus();
  for (uint64_t seed = 0; seed < 10; ++seed) {
    const OovReservation reservation = reserve_oov(corpus, 1, seed);
    REQUIRE(reservation.reserved_tags.size() == 1);
    const std::string& reserved = reservation.reserved_tags[0];
    // Exhaustive scan oracle.
    std::vector<std::string> expected;
    for (const auto& doc : corpus.documents) {
      if (std::find(doc.tags.begin(), doc.tags.end(), reserved) != doc.tags.end()) {
        expected.push_back(doc.id);
      }
    }
    CHECK(reservation.oov_document_ids == expected);
  }
}

TEST_CASE("reserve_oov validates its arguments and guards exhaustion") {
  const Corpus corpus = tiny_corpus();
  CHECK_THROWS_AS(reserve_oov(corpus, -1, 0), Error);
  CHECK_THROWS_AS(reserve_oov(corpus, 4, 0), Error);  // == vocabulary size

  // Every document contains tag "a": reserving it exhausts the corpus.
  std::vector<Document> docs;
  docs.push_back({"d1", {"a", "b"}});
  docs.push_back({"d2", {"a", "c"}});
  const Corpus dense = make_corpus(std::move(docs));
  bool saw_exhaustion = false;
  for (uint64_t seed = 0; seed < 16 && !saw_exhaustion; ++seed) {
    try {
      const auto reservation = reserve_oov(dense, 1, seed);
      CHECK(reservation.reserved_tags[0] != "a");
    } catch (const Error& e) {
      CHECK_MESSAGE(std::string(e.what()).find("exhausted") != std::string::npos, e.what());
      saw_exhaustion = true;
    }
  }
  CHECK(saw_exhaustion);
}

TEST_CASE("make_folds partitions the non-OOV documents") {
  std::vector<Document> docs;
  for (int i = 0; i < 9; ++i) {
    docs.push_back({"doc" + std::to_string(i), {"t" + std::to_string(i % 3), "u"}});
  }
  const Corpus corpus = make_corpus(std::move(docs));
  const SplitPlan plan = make_folds(corpus, {}, 3, 0.34, 11);

  REQUIRE(plan.folds.size() == 3);
  for (const auto& fold : plan.folds) {
    CHECK(fold.validation.size() + fold.test.size() == 3);  // equal parts of 9
    CHECK(fold.train.size() == 6);

    std::set<std::string> all;
    all.insert(fold.train.begin(), fold.train.end());
    all.insert(fold.validation.begin(), fold.validation.end());
    all.insert(fold.test.begin(), fold.test.end());
    CHECK(all.size() == 9);  // pairwise disjoint and covering
  }
}

TEST_CASE("make_folds is deterministic and validates inputs") {
  const Corpus corpus = tiny_corpus();
  const SplitPlan a = make_folds(corpus, {}, 3, 0.25, 99);
  const SplitPlan b = make_folds(corpus, {}, 3, 0.25, 99);
  const auto path_a = temp_file("plan_a.json");
  const auto path_b = temp_file("plan_b.json");
  save_split_plan(a, path_a.string());
  save_split_plan(b, path_b.string());
  std::ifstream fa(path_a), fb(path_b);
  const std::string text_a((std::istreambuf_iterator<char>(fa)), {});
  const std::string text_b((std::istreambuf_iterator<char>(fb)), {});
  CHECK(text_a == text_b);  // byte-identical plans

  CHECK_THROWS_AS(make_folds(corpus, {}, 1, 0.25, 0), Error);
  CHECK_THROWS_AS(make_folds(corpus, {}, 3, 0.0, 0), Error);
  CHECK_THROWS_AS(make_folds(corpus, {}, 7, 0.25, 0), Error);  // fewer docs than folds
}

TEST_CASE("reservation soundness: reserved tags never reach a training document") {
  const auto synthetic = generate_synthetic(3, 24, 60, 3, 6, 5);
  const Corpus& corpus = synthetic.corpus;
  const OovReservation reservation = reserve_oov(corpus, 4, 17);
  const SplitPlan plan = make_folds(corpus, reservation, 3, 0.3, 17);
  const Corpus working = apply_reservation(corpus, reservation);

  const std::unordered_set<std::string> reserved(plan.reserved_oov_tags.begin(),
                                                 plan.reserved_oov_tags.end());
  for (const auto& tag : working.vocabulary) CHECK(reserved.count(tag) == 0);
  const std::unordered_set<std::string> oov(plan.oov_document_ids.begin(),
                                            plan.oov_document_ids.end());
  for (const auto& fold : plan.folds) {
    const Corpus train = subset_documents(working, fold.train);
    for (const auto& doc : train.documents) {
      for (const auto& tag : doc.tags) CHECK(reserved.count(tag) == 0);
    }
    for (const auto& id : fold.train) CHECK(oov.count(id) == 0);
    for (const auto& id : fold.validation) CHECK(oov.count(id) == 0);
  }
}

TEST_CASE("split plan round-trips through JSON") {
  const Corpus corpus = tiny_corpus();
  const OovReservation reservation = reserve_oov(corpus, 1, 3);
  const SplitPlan plan = make_folds(corpus, reservation, 2, 0.5, 21);
  const auto path = temp_file("plan_roundtrip.json");
  save_split_plan(plan, path.string());
  const SplitPlan loaded = load_split_plan(path.string());
  CHECK(loaded.fold_count == plan.fold_count);
  CHECK(loaded.rng_seed == plan.rng_seed);
  CHECK(loaded.reserved_oov_tags == plan.reserved_oov_tags);
  CHECK(loaded.oov_document_ids == plan.oov_document_ids);
  REQUIRE(loaded.folds.size() == plan.folds.size());
  for (size_t i = 0; i < plan.folds.size(); ++i) {
    CHECK(loaded.folds[i].train == plan.folds[i].train);
    CHECK(loaded.folds[i].validation == plan.folds[i].validation);
    CHECK(loaded.folds[i].test == plan.folds[i].test);
  }
}

TEST_CASE("relevance loading validates values and tags") {
  const Corpus corpus = tiny_corpus();

  const auto good = temp_file("rel_good.jsonl");
  write_file(good, R"({"id":"d1","relevance":{"a":0.8,"b":0.2}})" "\n");
  const RelevanceTable table = load_relevance(good.string(), corpus);
  CHECK(table.row("d1").at("a") == doctest::Approx(0.8));
  CHECK(table.row("d1").at("b") == doctest::Approx(0.2));

  const auto negative = temp_file("rel_negative.jsonl");
  write_file(negative, R"({"id":"d1","relevance":{"a":-1}})" "\n");
  CHECK_THROWS_AS(load_relevance(negative.string(), corpus), Error);

  const auto unknown = temp_file("rel_unknown.jsonl");
  write_file(unknown, R"({"id":"d1","relevance":{"zz":1,"a":1,"yy":2}})" "\n");
  try {
    load_relevance(unknown.string(), corpus);
    FAIL("expected validation error");
  } catch (const Error& e) {
    const std::string what = e.what();
    CHECK(what.find("yy") != std::string::npos);
    CHECK(what.find("zz") != std::string::npos);
  }
}

TEST_CASE("relevance round-trips through save and load") {
  const Corpus corpus = tiny_corpus();
  RelevanceTable table;
  table.rows["d1"] = {{"a", 0.25}, {"b", 1.5}};
  table.rows["d2"] = {{"c", 0.125}};
  const auto path = temp_file("rel_roundtrip.jsonl");
  save_relevance(table, path.string());
  const RelevanceTable loaded = load_relevance(path.string(), corpus);
  CHECK(loaded.rows.size() == 2);
  CHECK(loaded.row("d1").at("b") == 1.5);
  CHECK(loaded.row("d2").at("c") == 0.125);
}

TEST_CASE("synthetic generator plants a single topic as certainty") {
  const auto synthetic = generate_synthetic(1, 8, 10, 3, 5, 2);
  for (const auto& mixture : synthetic.doc_mixtures) {
    REQUIRE(mixture.size() == 1);
    CHECK(mixture[0] == 1.0);
  }
}

TEST_CASE("synthetic generator is deterministic") {
  const auto a = generate_synthetic(3, 30, 40, 4, 8, 123);
  const auto b = generate_synthetic(3, 30, 40, 4, 8, 123);
  REQUIRE(a.corpus.documents.size() == b.corpus.documents.size());
  for (size_t i = 0; i < a.corpus.documents.size(); ++i) {
    CHECK(a.corpus.documents[i].tags == b.corpus.documents[i].tags);
  }
  CHECK(a.topic_word == b.topic_word);
}

TEST_CASE("synthetic topics have disjoint supports and one-hot documents stay inside them") {
  const auto synthetic = generate_synthetic(2, 80, 2000, 4, 8, 31);

  // Supports are disjoint 40-tag blocks.
  for (int j = 0; j < 80; ++j) {
    if (j < 40) {
      CHECK(synthetic.topic_word(0, j) > 0.0);
      CHECK(synthetic.topic_word(1, j) == 0.0);
    } else {
      CHECK(synthetic.topic_word(0, j) == 0.0);
      CHECK(synthetic.topic_word(1, j) > 0.0);
    }
  }

  // Documents whose planted mixture is (numerically) one-hot cannot mix
  // supports: the cold block's sampling probability is below 1e-9 per draw.
  int one_hot_docs = 0;
  for (size_t d = 0; d < synthetic.doc_mixtures.size(); ++d) {
    const auto& mixture = synthetic.doc_mixtures[d];
    const int hot = mixture[0] > mixture[1] ? 0 : 1;
    if (mixture[static_cast<size_t>(hot)] < 1.0 - 1e-9) continue;
    ++one_hot_docs;
    for (const auto& tag : synthetic.corpus.documents[d].tags) {
      const auto it = std::find(synthetic.tag_names.begin(), synthetic.tag_names.end(), tag);
      REQUIRE(it != synthetic.tag_names.end());
      const int idx = static_cast<int>(it - synthetic.tag_names.begin());
      CHECK(synthetic.topic_word(hot, idx) > 0.0);
    }
  }
  CHECK(one_hot_docs > 0);  // the assertion above is not vacuous
}

TEST_CASE("synthetic relevance is the planted tag probability under the mixture") {
  const auto synthetic = generate_synthetic(3, 12, 20, 3, 5, 77);
  for (const auto& doc : synthetic.corpus.documents) {
    const auto& row = synthetic.relevance.row(doc.id);
    double total = 0.0;
    for (const auto& [tag, value] : row) {
      CHECK(value >= 0.0);
      total += value;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("community generator separates communities and is deterministic") {
  const auto a = generate_communities(10, 3, 60, 4, 7, 9);
  const auto b = generate_communities(10, 3, 60, 4, 7, 9);
  REQUIRE(a.corpus.documents.size() == b.corpus.documents.size());
  for (size_t i = 0; i < a.corpus.documents.size(); ++i) {
    CHECK(a.corpus.documents[i].tags == b.corpus.documents[i].tags);
  }

  // Documents draw only from their community pool (own block + shared tags).
  for (size_t d = 0; d < a.corpus.documents.size(); ++d) {
    const int community = a.doc_community[d];
    for (const auto& tag : a.corpus.documents[d].tags) {
      const auto it = std::find(a.tag_names.begin(), a.tag_names.end(), tag);
      REQUIRE(it != a.tag_names.end());
      const int idx = static_cast<int>(it - a.tag_names.begin());
      CHECK(a.community_tag_prob(community, idx) > 0.0);
    }
  }
}

TEST_SUITE_END();
