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

#ifndef TAGSEM_PIPELINE_HPP
#define TAGSEM_PIPELINE_HPP

#include <string>
#include <vector>

#include <json.hpp>

#include "network.hpp"
#include "topics.hpp"

namespace tagsem {

/// Fully resolved run configuration: one flat JSON object, every field has a
/// default, and the resolved value is echoed into the output directory.
struct RunConfig {
  // Data and layout.
  std::string corpus;
  std::string relevance;
  std::string output_dir = "out";
  uint64_t seed = 42;

  // Split planning.
  int fold_count = 3;
  double validation_fraction = 0.23;
  int oov_tag_count = 0;

  // Topic model.
  LdaConfig lda;

  // Network.
  std::vector<int> layer_plan = {100, 100, 10};
  HyperParams hyper;
  bool standardize_features = false;

  // Evaluation.
  std::string ranking_mode = "prediction";   // prediction | distance
  std::string eval_split = "test";           // train | validation | test
  std::string ranker = "siamese-ce";         // pretrained | ce | siamese-ce | random | lda
  std::string checkpoint_stage = "siamese-ce";
  int priming_k_max = 10;
  bool exclude_query = false;
  bool oov_queries = false;
  int completion_k = 20;
  std::string embedding_format = "jsonl";    // jsonl | csv

  // Synthetic data generation (prepare).
  std::string synthetic;                     // "" | lda | communities
  int synthetic_topic_count = 3;
  int synthetic_vocab_size = 30;
  int synthetic_doc_count = 500;
  int synthetic_min_doc_length = 5;
  int synthetic_max_doc_length = 9;
  int synthetic_community_tags = 40;
  int synthetic_shared_tags = 5;

  // Report.
  std::vector<std::string> report_inputs;
  std::string report_baseline;

  nlohmann::json to_json() const;
  static RunConfig from_json(const nlohmann::json& doc);

  /// Throws a config error listing every violation.
  void validate() const;

  std::string artifact(const std::string& name) const;
};

/// Runs one subcommand against the resolved configuration. Subcommands:
/// prepare, train-topics, pretrain, train-predict, train-siamese, embed,
/// prime, complete, report. Throws Error on failure.
void run_command(const std::string& subcommand, const RunConfig& config);

}  // namespace tagsem

#endif  // TAGSEM_PIPELINE_HPP
