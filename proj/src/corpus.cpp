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

#include "corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "error.hpp"
#include "rng.hpp"

namespace tagsem {

using nlohmann::json;

std::vector<int> Corpus::tag_indices(const Document& doc) const {
  std::vector<int> out;
  out.reserve(doc.tags.size());
  for (const auto& tag : doc.tags) {
    const int idx = tag_index(tag);
    if (idx >= 0) out.push_back(idx);
  }
  std::sort(out.begin(), out.end());
  return out;
}

Corpus make_corpus(std::vector<Document> documents) {
  if (documents.empty()) throw Error(ErrorCode::kValidation, "no documents");

  std::set<std::string> vocab;
  std::unordered_set<std::string> seen_ids;
  for (auto& doc : documents) {
    if (!seen_ids.insert(doc.id).second) {
      throw Error(ErrorCode::kValidation, "duplicate document id: " + doc.id);
    }
    std::sort(doc.tags.begin(), doc.tags.end());
    doc.tags.erase(std::unique(doc.tags.begin(), doc.tags.end()), doc.tags.end());
    if (doc.tags.empty()) {
      throw Error(ErrorCode::kValidation, "document " + doc.id + " has no tags");
    }
    vocab.insert(doc.tags.begin(), doc.tags.end());
  }

  Corpus corpus;
  corpus.documents = std::move(documents);
  corpus.vocabulary.assign(vocab.begin(), vocab.end());
  corpus.vocab_index.reserve(corpus.vocabulary.size());
  for (size_t i = 0; i < corpus.vocabulary.size(); ++i) {
    corpus.vocab_index.emplace(corpus.vocabulary[i], static_cast<int>(i));
  }
  return corpus;
}

Corpus load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open corpus file: " + path);

  std::vector<Document> documents;
  std::string line;
  size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kParse,
                  path + ":" + std::to_string(line_number) + ": " + e.what());
    }
    if (!record.is_object() || !record.contains("id") || !record["id"].is_string() ||
        !record.contains("tags") || !record["tags"].is_array()) {
      throw Error(ErrorCode::kParse, path + ":" + std::to_string(line_number) +
                                         ": expected {\"id\": string, \"tags\": [string...]}");
    }
    Document doc;
    doc.id = record["id"].get<std::string>();
    for (const auto& tag : record["tags"]) {
      if (!tag.is_string()) {
        throw Error(ErrorCode::kParse,
                    path + ":" + std::to_string(line_number) + ": tags must be strings");
      }
      doc.tags.push_back(tag.get<std::string>());
    }
    if (doc.tags.empty()) {
      throw Error(ErrorCode::kValidation,
                  path + ":" + std::to_string(line_number) + ": empty tag list for " + doc.id);
    }
    documents.push_back(std::move(doc));
  }
  if (documents.empty()) throw Error(ErrorCode::kValidation, "no documents in " + path);
  return make_corpus(std::move(documents));
}

void save_corpus(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write corpus file: " + path);
  for (const auto& doc : corpus.documents) {
    json record;
    record["id"] = doc.id;
    record["tags"] = doc.tags;
    out << record.dump() << "\n";
  }
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path);
}

OovReservation reserve_oov(const Corpus& corpus, int tag_count, uint64_t seed) {
  const int vocab_size = static_cast<int>(corpus.vocabulary.size());
  if (tag_count < 0 || tag_count >= vocab_size) {
    throw Error(ErrorCode::kInvalidArgument,
                "oov tag count must be in [0, vocabulary size): got " +
                    std::to_string(tag_count));
  }

  OovReservation reservation;
  if (tag_count == 0) return reservation;

  Rng rng(seed);
  const std::vector<int> drawn = rng.sample_without_replacement(vocab_size, tag_count);
  std::unordered_set<std::string> reserved;
  for (const int idx : drawn) reserved.insert(corpus.vocabulary[static_cast<size_t>(idx)]);
  reservation.reserved_tags.assign(reserved.begin(), reserved.end());
  std::sort(reservation.reserved_tags.begin(), reservation.reserved_tags.end());

  for (const auto& doc : corpus.documents) {
    const bool hit = std::any_of(doc.tags.begin(), doc.tags.end(),
                                 [&](const std::string& tag) { return reserved.count(tag) > 0; });
    if (hit) reservation.oov_document_ids.push_back(doc.id);
  }
  if (reservation.oov_document_ids.size() == corpus.documents.size()) {
    throw Error(ErrorCode::kValidation, "corpus exhausted by reservation");
  }
  return reservation;
}

SplitPlan make_folds(const Corpus& corpus, const OovReservation& reservation,
                     int fold_count, double validation_fraction, uint64_t seed) {
  if (fold_count < 2) {
    throw Error(ErrorCode::kInvalidArgument, "fold count must be >= 2");
  }
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "validation fraction must be in (0, 1)");
  }

  std::unordered_set<std::string> oov(reservation.oov_document_ids.begin(),
                                      reservation.oov_document_ids.end());
  std::vector<std::string> ids;
  for (const auto& doc : corpus.documents) {
    if (!oov.count(doc.id)) ids.push_back(doc.id);
  }
  if (static_cast<int>(ids.size()) < fold_count) {
    throw Error(ErrorCode::kValidation, "fewer documents than folds");
  }

  Rng rng(seed);
  rng.shuffle(ids);

  SplitPlan plan;
  plan.fold_count = fold_count;
  plan.reserved_oov_tags = reservation.reserved_tags;
  plan.oov_document_ids = reservation.oov_document_ids;
  plan.rng_seed = seed;

  // Near-equal parts: the first (n % fold_count) parts get one extra document.
  const size_t n = ids.size();
  const size_t base = n / static_cast<size_t>(fold_count);
  const size_t extra = n % static_cast<size_t>(fold_count);
  std::vector<std::vector<std::string>> parts;
  size_t offset = 0;
  for (int i = 0; i < fold_count; ++i) {
    const size_t len = base + (static_cast<size_t>(i) < extra ? 1 : 0);
    parts.emplace_back(ids.begin() + offset, ids.begin() + offset + len);
    offset += len;
  }

  for (int i = 0; i < fold_count; ++i) {
    Fold fold;
    const auto& held_out = parts[static_cast<size_t>(i)];
    const size_t val_count = static_cast<size_t>(
        std::ceil(validation_fraction * static_cast<double>(held_out.size())));
    fold.validation.assign(held_out.begin(), held_out.begin() + val_count);
    fold.test.assign(held_out.begin() + val_count, held_out.end());
    for (int j = 0; j < fold_count; ++j) {
      if (j == i) continue;
      const auto& part = parts[static_cast<size_t>(j)];
      fold.train.insert(fold.train.end(), part.begin(), part.end());
    }
    plan.folds.push_back(std::move(fold));
  }
  return plan;
}

void save_split_plan(const SplitPlan& plan, const std::string& path) {
  json doc;
  doc["format_version"] = 1;
  doc["fold_count"] = plan.fold_count;
  doc["rng_seed"] = plan.rng_seed;
  doc["reserved_oov_tags"] = plan.reserved_oov_tags;
  doc["oov_documents"] = plan.oov_document_ids;
  doc["folds"] = json::array();
  for (const auto& fold : plan.folds) {
    doc["folds"].push_back({{"train", fold.train},
                            {"validation", fold.validation},
                            {"test", fold.test}});
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write split plan: " + path);
  out << doc.dump(2) << "\n";
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path);
}

SplitPlan load_split_plan(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kMissingInput, "missing split plan: " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, path + ": " + e.what());
  }
  SplitPlan plan;
  try {
    plan.fold_count = doc.at("fold_count").get<int>();
    plan.rng_seed = doc.at("rng_seed").get<uint64_t>();
    plan.reserved_oov_tags = doc.at("reserved_oov_tags").get<std::vector<std::string>>();
    plan.oov_document_ids = doc.at("oov_documents").get<std::vector<std::string>>();
    for (const auto& fold_json : doc.at("folds")) {
      Fold fold;
      fold.train = fold_json.at("train").get<std::vector<std::string>>();
      fold.validation = fold_json.at("validation").get<std::vector<std::string>>();
      fold.test = fold_json.at("test").get<std::vector<std::string>>();
      plan.folds.push_back(std::move(fold));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, path + ": " + e.what());
  }
  return plan;
}

Corpus apply_reservation(const Corpus& corpus, const OovReservation& reservation) {
  std::unordered_set<std::string> oov(reservation.oov_document_ids.begin(),
                                      reservation.oov_document_ids.end());
  std::unordered_set<std::string> reserved(reservation.reserved_tags.begin(),
                                           reservation.reserved_tags.end());

  Corpus out;
  for (const auto& doc : corpus.documents) {
    if (!oov.count(doc.id)) out.documents.push_back(doc);
  }
  if (out.documents.empty()) {
    throw Error(ErrorCode::kValidation, "corpus exhausted by reservation");
  }
  for (const auto& tag : corpus.vocabulary) {
    if (!reserved.count(tag)) out.vocabulary.push_back(tag);
  }
  for (size_t i = 0; i < out.vocabulary.size(); ++i) {
    out.vocab_index.emplace(out.vocabulary[i], static_cast<int>(i));
  }
  return out;
}

Corpus subset_documents(const Corpus& corpus, const std::vector<std::string>& ids) {
  std::unordered_map<std::string, const Document*> by_id;
  by_id.reserve(corpus.documents.size());
  for (const auto& doc : corpus.documents) by_id.emplace(doc.id, &doc);

  Corpus out;
  out.vocabulary = corpus.vocabulary;
  out.vocab_index = corpus.vocab_index;
  out.documents.reserve(ids.size());
  for (const auto& id : ids) {
    const auto it = by_id.find(id);
    if (it == by_id.end()) {
      throw Error(ErrorCode::kValidation, "unknown document id in split: " + id);
    }
    out.documents.push_back(*it->second);
  }
  return out;
}

const std::unordered_map<std::string, double>& RelevanceTable::row(
    const std::string& doc_id) const {
  const auto it = rows.find(doc_id);
  if (it == rows.end()) {
    throw Error(ErrorCode::kValidation, "no relevance row for document: " + doc_id);
  }
  return it->second;
}

RelevanceTable load_relevance(const std::string& path, const Corpus& corpus) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open relevance file: " + path);

  RelevanceTable table;
  std::string line;
  size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kParse,
                  path + ":" + std::to_string(line_number) + ": " + e.what());
    }
    if (!record.contains("id") || !record["id"].is_string() ||
        !record.contains("relevance") || !record["relevance"].is_object()) {
      throw Error(ErrorCode::kParse,
                  path + ":" + std::to_string(line_number) +
                      ": expected {\"id\": string, \"relevance\": {tag: number}}");
    }
    const std::string id = record["id"].get<std::string>();
    std::unordered_map<std::string, double> row;
    std::vector<std::string> unknown;
    for (const auto& [tag, value] : record["relevance"].items()) {
      if (corpus.tag_index(tag) < 0) {
        unknown.push_back(tag);
        continue;
      }
      const double rel = value.get<double>();
      if (rel < 0.0) {
        throw Error(ErrorCode::kValidation,
                    path + ":" + std::to_string(line_number) + ": negative relevance for tag " +
                        tag);
      }
      row.emplace(tag, rel);
    }
    if (!unknown.empty()) {
      std::sort(unknown.begin(), unknown.end());
      std::string joined;
      for (const auto& tag : unknown) {
        if (!joined.empty()) joined += ", ";
        joined += tag;
      }
      throw Error(ErrorCode::kValidation,
                  path + ":" + std::to_string(line_number) + ": unknown tags: " + joined);
    }
    table.rows[id] = std::move(row);
  }
  return table;
}

void save_relevance(const RelevanceTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write relevance file: " + path);
  // Sort document ids so the file is stable across runs.
  std::vector<std::string> ids;
  ids.reserve(table.rows.size());
  for (const auto& [id, row] : table.rows) ids.push_back(id);
  std::sort(ids.begin(), ids.end());
  for (const auto& id : ids) {
    json rel = json::object();
    const auto& row = table.rows.at(id);
    std::vector<std::string> tags;
    for (const auto& [tag, value] : row) tags.push_back(tag);
    std::sort(tags.begin(), tags.end());
    for (const auto& tag : tags) rel[tag] = row.at(tag);
    json record;
    record["id"] = id;
    record["relevance"] = rel;
    out << record.dump() << "\n";
  }
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path);
}

namespace {

std::string doc_name(int i) {
  std::ostringstream out;
  out << "doc" << i;
  return out.str();
}

/// Zero-padded names so lexicographic vocabulary order matches index order.
std::vector<std::string> numbered_names(const std::string& prefix, int count, int width) {
  std::vector<std::string> names(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) {
    std::string digits = std::to_string(i);
    while (static_cast<int>(digits.size()) < width) digits.insert(digits.begin(), '0');
    names[static_cast<size_t>(i)] = prefix + digits;
  }
  return names;
}

/// Samples doc-length distinct tags from a categorical by repeated draws.
std::vector<std::string> sample_tag_set(const std::vector<double>& prob,
                                        const std::vector<std::string>& names,
                                        int target_length, Rng& rng) {
  std::unordered_set<std::string> picked;
  std::vector<std::string> out;
  int attempts = 0;
  const int max_attempts = target_length * 64;
  while (static_cast<int>(out.size()) < target_length && attempts < max_attempts) {
    ++attempts;
    double u = rng.uniform01();
    size_t idx = prob.size() - 1;
    for (size_t j = 0; j < prob.size(); ++j) {
      u -= prob[j];
      if (u < 0.0) {
        idx = j;
        break;
      }
    }
    if (picked.insert(names[idx]).second) out.push_back(names[idx]);
  }
  return out;
}

}  // namespace

SyntheticCorpus generate_synthetic(int topic_count, int vocab_size, int doc_count,
                                   int min_doc_length, int max_doc_length, uint64_t seed) {
  if (topic_count < 1 || vocab_size < topic_count || doc_count < 1) {
    throw Error(ErrorCode::kInvalidArgument, "invalid synthetic corpus parameters");
  }
  if (min_doc_length < 1 || max_doc_length < min_doc_length) {
    throw Error(ErrorCode::kInvalidArgument, "invalid document length range");
  }

  const int width = static_cast<int>(std::to_string(vocab_size - 1).size());
  const std::vector<std::string> names = numbered_names("tag", vocab_size, width);

  Rng rng(seed);

  // Planted topics with disjoint supports: near-equal contiguous blocks, with
  // a smooth (high-concentration Dirichlet) categorical inside each block.
  Matrix topic_word(topic_count, vocab_size, 0.0);
  const int block = vocab_size / topic_count;
  const int leftover = vocab_size % topic_count;
  int start = 0;
  for (int k = 0; k < topic_count; ++k) {
    const int len = block + (k < leftover ? 1 : 0);
    const Vector weights = rng.dirichlet(25.0, len);
    for (int j = 0; j < len; ++j) topic_word(k, start + j) = weights[static_cast<size_t>(j)];
    start += len;
  }

  SyntheticCorpus result;
  result.tag_names = names;
  result.topic_word = topic_word;

  std::vector<Document> documents;
  for (int d = 0; d < doc_count; ++d) {
    const Vector mixture =
        topic_count == 1 ? Vector{1.0} : rng.dirichlet(0.3, topic_count);
    Vector tag_prob(static_cast<size_t>(vocab_size), 0.0);
    for (int k = 0; k < topic_count; ++k) {
      for (int j = 0; j < vocab_size; ++j) {
        tag_prob[static_cast<size_t>(j)] += mixture[static_cast<size_t>(k)] * topic_word(k, j);
      }
    }
    const int length = min_doc_length +
                       static_cast<int>(rng.uniform_int(
                           static_cast<uint64_t>(max_doc_length - min_doc_length + 1)));
    Document doc;
    doc.id = doc_name(d);
    doc.tags = sample_tag_set(tag_prob, names, length, rng);
    if (doc.tags.empty()) doc.tags.push_back(names[rng.uniform_int(names.size())]);
    documents.push_back(std::move(doc));
    result.doc_mixtures.push_back(mixture);

    std::unordered_map<std::string, double> row;
    for (int j = 0; j < vocab_size; ++j) {
      if (tag_prob[static_cast<size_t>(j)] > 0.0) {
        row.emplace(names[static_cast<size_t>(j)], tag_prob[static_cast<size_t>(j)]);
      }
    }
    result.relevance.rows.emplace(doc_name(d), std::move(row));
  }

  result.corpus = make_corpus(std::move(documents));
  return result;
}

CommunityCorpus generate_communities(int community_tag_count, int shared_tag_count,
                                     int doc_count, int min_doc_length, int max_doc_length,
                                     uint64_t seed) {
  if (community_tag_count < 1 || shared_tag_count < 0 || doc_count < 1) {
    throw Error(ErrorCode::kInvalidArgument, "invalid community corpus parameters");
  }
  if (min_doc_length < 1 || max_doc_length < min_doc_length) {
    throw Error(ErrorCode::kInvalidArgument, "invalid document length range");
  }
  const int pool = community_tag_count + shared_tag_count;
  if (max_doc_length > pool) {
    throw Error(ErrorCode::kInvalidArgument, "document length exceeds community tag pool");
  }

  const int vocab_size = 2 * community_tag_count + shared_tag_count;
  const int max_index = std::max({community_tag_count - 1, shared_tag_count - 1, 0});
  const int width = static_cast<int>(std::to_string(max_index).size());
  std::vector<std::string> names = numbered_names("a", community_tag_count, width);
  const auto b_names = numbered_names("b", community_tag_count, width);
  const auto s_names = numbered_names("s", shared_tag_count, width);
  names.insert(names.end(), b_names.begin(), b_names.end());
  names.insert(names.end(), s_names.begin(), s_names.end());

  Rng rng(seed);

  // Zipf-like weights over each community's pool (own tags plus shared tags),
  // with a per-community random popularity order.
  CommunityCorpus result;
  result.tag_names = names;
  result.community_tag_prob = Matrix(2, vocab_size, 0.0);
  for (int c = 0; c < 2; ++c) {
    std::vector<int> members;
    for (int i = 0; i < community_tag_count; ++i) members.push_back(c * community_tag_count + i);
    for (int i = 0; i < shared_tag_count; ++i) members.push_back(2 * community_tag_count + i);
    rng.shuffle(members);
    double total = 0.0;
    for (size_t r = 0; r < members.size(); ++r) total += 1.0 / static_cast<double>(r + 1);
    for (size_t r = 0; r < members.size(); ++r) {
      result.community_tag_prob(c, members[r]) =
          (1.0 / static_cast<double>(r + 1)) / total;
    }
  }

  std::vector<Document> documents;
  for (int d = 0; d < doc_count; ++d) {
    const int community = d % 2;
    Vector prob(static_cast<size_t>(vocab_size));
    for (int j = 0; j < vocab_size; ++j) prob[static_cast<size_t>(j)] =
        result.community_tag_prob(community, j);
    const int length = min_doc_length +
                       static_cast<int>(rng.uniform_int(
                           static_cast<uint64_t>(max_doc_length - min_doc_length + 1)));
    Document doc;
    doc.id = doc_name(d);
    doc.tags = sample_tag_set(prob, names, length, rng);
    if (doc.tags.empty()) continue;
    documents.push_back(std::move(doc));
    result.doc_community.push_back(community);

    std::unordered_map<std::string, double> row;
    for (int j = 0; j < vocab_size; ++j) {
      const double p = result.community_tag_prob(community, j);
      if (p > 0.0) row.emplace(names[static_cast<size_t>(j)], p);
    }
    result.relevance.rows.emplace(doc_name(d), std::move(row));
  }

  result.corpus = make_corpus(std::move(documents));
  return result;
}

}  // namespace tagsem
