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

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "error.hpp"
#include "pipeline.hpp"

using namespace tagsem;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "tagsem_pipeline_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir.string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  return std::string((std::istreambuf_iterator<char>(in)), {});
}

/// Small but trainable configuration over the two-community generator.
RunConfig mini_config(const std::string& out_dir) {
  RunConfig config;
  config.output_dir = out_dir;
  config.synthetic = "communities";
  config.synthetic_community_tags = 12;
  config.synthetic_shared_tags = 3;
  config.synthetic_doc_count = 120;
  config.synthetic_min_doc_length = 4;
  config.synthetic_max_doc_length = 7;
  config.fold_count = 3;
  config.validation_fraction = 0.3;
  config.lda.topic_count = 2;
  config.lda.sweeps = 150;
  config.lda.doc_topic_prior = 0.5;
  config.lda.infer_burnin = 20;
  config.lda.infer_samples = 20;
  config.layer_plan = {16, 8, 4};
  config.hyper.max_epochs = 6;
  config.hyper.patience = 3;
  config.hyper.pretrain_epochs = 2;
  config.standardize_features = true;
  config.priming_k_max = 5;
  config.completion_k = 8;
  config.seed = 2026;
  return config;
}

}  // namespace

TEST_SUITE_BEGIN("pipeline");

TEST_CASE("config round-trips through flat JSON with defaults") {
  RunConfig config;
  config.corpus = "x.jsonl";
  config.hyper.alpha = 0.25;
  config.layer_plan = {7, 3};
  const json doc = config.to_json();
  const RunConfig back = RunConfig::from_json(doc);
  CHECK(back.corpus == "x.jsonl");
  CHECK(back.hyper.alpha == 0.25);
  CHECK(back.layer_plan == std::vector<int>{7, 3});

  // Partial configs pick up defaults.
  const RunConfig partial = RunConfig::from_json(json{{"fold_count", 5}});
  CHECK(partial.fold_count == 5);
  CHECK(partial.validation_fraction == RunConfig{}.validation_fraction);
}

TEST_CASE("config rejects unknown keys and invalid values") {
  CHECK_THROWS_WITH_AS(RunConfig::from_json(json{{"fold_cout", 3}}),
                       doctest::Contains("unknown config keys"), Error);

  RunConfig bad;
  bad.fold_count = 1;
  bad.ranking_mode = "sideways";
  try {
    bad.validate();
    FAIL("expected config error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kConfig);
    const std::string what = e.what();
    CHECK(what.find("fold_count") != std::string::npos);
    CHECK(what.find("ranking_mode") != std::string::npos);
  }
}

TEST_CASE("subcommands demand their inputs in order") {
  const RunConfig config = mini_config(fresh_dir("ordering"));
  try {
    run_command("prime", config);
    FAIL("expected missing-input error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kMissingInput);
  }
  CHECK_THROWS_AS(run_command("definitely-not-a-command", config), Error);
}

TEST_CASE("full pipeline on the bundled synthetic corpus") {
  const std::string out_dir = fresh_dir("full");
  RunConfig config = mini_config(out_dir);

  run_command("prepare", config);
  // Later commands read the echoed config so they see the generated paths.
  config = RunConfig::from_json(json::parse(slurp(out_dir + "/config.json")));
  CHECK(fs::exists(out_dir + "/corpus.jsonl"));
  CHECK(fs::exists(out_dir + "/relevance.jsonl"));
  CHECK(fs::exists(out_dir + "/split_plan.json"));

  run_command("train-topics", config);
  CHECK(fs::exists(out_dir + "/topics.fold0.json"));
  CHECK(fs::exists(out_dir + "/topics.fold2.json"));

  run_command("pretrain", config);
  CHECK(fs::exists(out_dir + "/model.pretrained.fold0.json"));

  run_command("train-predict", config);
  CHECK(fs::exists(out_dir + "/model.ce.fold0.json"));

  run_command("train-siamese", config);
  CHECK(fs::exists(out_dir + "/model.siamese-ce.fold0.json"));

  config.checkpoint_stage = "siamese-ce";
  run_command("embed", config);
  CHECK(fs::exists(out_dir + "/embeddings.siamese-ce.fold0.jsonl"));

  config.ranker = "siamese-ce";
  run_command("prime", config);
  CHECK(fs::exists(out_dir + "/priming.siamese-ce.prediction.csv"));
  CHECK(fs::exists(out_dir + "/priming.siamese-ce.prediction.json"));
  CHECK(fs::exists(out_dir + "/pr_curve.siamese-ce.csv"));

  config.ranker = "random";
  run_command("prime", config);
  CHECK(fs::exists(out_dir + "/priming.random.csv"));

  config.ranker = "lda";
  run_command("prime", config);
  CHECK(fs::exists(out_dir + "/priming.lda.csv"));

  config.ranker = "siamese-ce";
  run_command("complete", config);
  CHECK(fs::exists(out_dir + "/completion.siamese-ce.prediction.csv"));

  config.report_inputs = {out_dir + "/priming.siamese-ce.prediction.json"};
  config.report_baseline = out_dir + "/priming.random.json";
  run_command("report", config);
  CHECK(fs::exists(out_dir + "/report.csv"));
  CHECK(fs::exists(out_dir + "/report.json"));

  // The trained model beats the random baseline on the test split.
  const json model_summary = json::parse(slurp(out_dir + "/priming.siamese-ce.prediction.json"));
  const json random_summary = json::parse(slurp(out_dir + "/priming.random.json"));
  const double model_map = model_summary.at("mean").at("map").get<double>();
  const double random_map = random_summary.at("mean").at("map").get<double>();
  CHECK(model_map > random_map);

  // Metric rows parse and stay in [0, 1].
  for (const auto& fold : model_summary.at("folds")) {
    CHECK(fold.at("map").get<double>() >= 0.0);
    CHECK(fold.at("map").get<double>() <= 1.0);
    CHECK(fold.at("auc").get<double>() >= 0.0);
    CHECK(fold.at("auc").get<double>() <= 1.0);
  }

  // The report carries effect sizes against the baseline.
  const json report = json::parse(slurp(out_dir + "/report.json"));
  bool saw_effect = false;
  for (const auto& row : report) {
    if (row.contains("cohens_d")) saw_effect = true;
  }
  CHECK(saw_effect);
}

TEST_CASE("reruns with the same config are byte-identical") {
  const std::string dir_a = fresh_dir("rerun_a");
  const std::string dir_b = fresh_dir("rerun_b");

  for (const std::string& dir : {dir_a, dir_b}) {
    RunConfig config = mini_config(dir);
    config.hyper.max_epochs = 3;
    config.synthetic_doc_count = 60;
    config.fold_count = 2;
    run_command("prepare", config);
    config = RunConfig::from_json(json::parse(slurp(dir + "/config.json")));
    run_command("train-topics", config);
    run_command("pretrain", config);
    run_command("train-predict", config);
    config.ranker = "ce";
    run_command("prime", config);
  }

  for (const std::string& name :
       {"/corpus.jsonl", "/split_plan.json", "/topics.fold0.json", "/model.ce.fold0.json",
        "/priming.ce.prediction.csv"}) {
    CHECK_MESSAGE(slurp(dir_a + name) == slurp(dir_b + name), name);
  }
}

TEST_SUITE_END();
