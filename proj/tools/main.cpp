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

// tagsem command line driver. Flags are merged over an optional config file
// which in turn is merged over the library defaults; the fully resolved
// configuration is what the pipeline sees (and echoes into the output
// directory). All work happens behind the C API.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "tagsem/tagsem.h"

namespace {

using nlohmann::json;

int exit_code_for(tagsem_status status) {
  switch (status) {
    case TAGSEM_OK: return 0;
    case TAGSEM_ERROR_MISSING_INPUT: return 2;
    case TAGSEM_ERROR_CONFIG: return 3;
    default: return 1;
  }
}

struct FlagOverrides {
  std::optional<std::string> corpus, relevance, output_dir, ranking_mode, eval_split, ranker,
      checkpoint_stage, embedding_format, synthetic, report_baseline;
  std::optional<uint64_t> seed;
  std::optional<int> fold_count, oov_tag_count, topic_count, lda_sweeps, priming_k_max,
      completion_k, max_epochs, patience, batch_size, pair_batch_size, pretrain_epochs,
      synthetic_doc_count, synthetic_vocab_size, synthetic_topic_count,
      synthetic_community_tags, synthetic_shared_tags, synthetic_min_doc_length,
      synthetic_max_doc_length;
  std::optional<double> validation_fraction, lambda, beta, rho, alpha, learning_rate, momentum,
      doc_topic_prior, topic_word_prior;
  std::optional<bool> standardize_features, exclude_query, oov_queries, estimate_priors,
      swap_kappa;
  std::vector<std::string> report_inputs;
  std::vector<int> layer_plan;
};

void apply_overrides(json& config, const FlagOverrides& flags) {
  const auto set = [&config](const char* key, const auto& value) {
    if (value) config[key] = *value;
  };
  set("corpus", flags.corpus);
  set("relevance", flags.relevance);
  set("output_dir", flags.output_dir);
  set("ranking_mode", flags.ranking_mode);
  set("eval_split", flags.eval_split);
  set("ranker", flags.ranker);
  set("checkpoint_stage", flags.checkpoint_stage);
  set("embedding_format", flags.embedding_format);
  set("synthetic", flags.synthetic);
  set("report_baseline", flags.report_baseline);
  set("seed", flags.seed);
  set("fold_count", flags.fold_count);
  set("oov_tag_count", flags.oov_tag_count);
  set("topic_count", flags.topic_count);
  set("lda_sweeps", flags.lda_sweeps);
  set("priming_k_max", flags.priming_k_max);
  set("completion_k", flags.completion_k);
  set("max_epochs", flags.max_epochs);
  set("patience", flags.patience);
  set("batch_size", flags.batch_size);
  set("pair_batch_size", flags.pair_batch_size);
  set("pretrain_epochs", flags.pretrain_epochs);
  set("synthetic_doc_count", flags.synthetic_doc_count);
  set("synthetic_vocab_size", flags.synthetic_vocab_size);
  set("synthetic_topic_count", flags.synthetic_topic_count);
  set("synthetic_community_tags", flags.synthetic_community_tags);
  set("synthetic_shared_tags", flags.synthetic_shared_tags);
  set("synthetic_min_doc_length", flags.synthetic_min_doc_length);
  set("synthetic_max_doc_length", flags.synthetic_max_doc_length);
  set("validation_fraction", flags.validation_fraction);
  set("lambda", flags.lambda);
  set("beta", flags.beta);
  set("rho", flags.rho);
  set("alpha", flags.alpha);
  set("learning_rate", flags.learning_rate);
  set("momentum", flags.momentum);
  set("doc_topic_prior", flags.doc_topic_prior);
  set("topic_word_prior", flags.topic_word_prior);
  set("standardize_features", flags.standardize_features);
  set("exclude_query", flags.exclude_query);
  set("oov_queries", flags.oov_queries);
  set("estimate_priors", flags.estimate_priors);
  set("swap_kappa", flags.swap_kappa);
  if (!flags.report_inputs.empty()) config["report_inputs"] = flags.report_inputs;
  if (!flags.layer_plan.empty()) config["layer_plan"] = flags.layer_plan;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tagsem: contextualized tag embeddings from co-occurring tags"};
  app.require_subcommand(1);

  std::string config_path;
  FlagOverrides flags;

  app.add_option("-c,--config", config_path, "JSON config file (flags override its values)");

  const auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--corpus", flags.corpus, "corpus JSONL path");
    cmd->add_option("--relevance", flags.relevance, "relevance JSONL path");
    cmd->add_option("-o,--output-dir", flags.output_dir, "artifact directory");
    cmd->add_option("--seed", flags.seed, "master RNG seed");
    cmd->add_option("--fold-count", flags.fold_count, "cross-validation folds");
    cmd->add_option("--validation-fraction", flags.validation_fraction,
                    "share of each held-out part used for validation");
    cmd->add_option("--oov-tag-count", flags.oov_tag_count, "tags reserved for OOV evaluation");
    cmd->add_option("--topic-count", flags.topic_count, "LDA topics");
    cmd->add_option("--lda-sweeps", flags.lda_sweeps, "Gibbs sweeps for LDA training");
    cmd->add_option("--doc-topic-prior", flags.doc_topic_prior,
                    "symmetric document-topic prior (0 = 50/topics)");
    cmd->add_option("--topic-word-prior", flags.topic_word_prior, "symmetric topic-word prior");
    cmd->add_flag("--estimate-priors", flags.estimate_priors,
                  "fixed-point prior estimation during LDA training");
    cmd->add_option("--layer-plan", flags.layer_plan, "hidden layer widths");
    cmd->add_option("--lambda", flags.lambda, "KL sensitivity");
    cmd->add_option("--beta", flags.beta, "embedding spread scale");
    cmd->add_option("--rho", flags.rho, "negative-pair importance");
    cmd->add_option("--alpha", flags.alpha, "distance loss trade-off");
    cmd->add_option("--learning-rate", flags.learning_rate, "SGD learning rate");
    cmd->add_option("--momentum", flags.momentum, "SGD momentum");
    cmd->add_option("--batch-size", flags.batch_size, "prediction-stage batch size");
    cmd->add_option("--pair-batch-size", flags.pair_batch_size, "siamese-stage pairs per update");
    cmd->add_option("--max-epochs", flags.max_epochs, "epoch cap per training stage");
    cmd->add_option("--patience", flags.patience, "early stopping patience (epochs)");
    cmd->add_option("--pretrain-epochs", flags.pretrain_epochs, "autoencoder epochs per layer");
    cmd->add_flag("--standardize-features", flags.standardize_features,
                  "z-score the tag features before the network input");
    cmd->add_flag("--swap-kappa", flags.swap_kappa, "swap the kappa weighting (experimental)");
    cmd->add_option("--ranking-mode", flags.ranking_mode, "prediction | distance");
    cmd->add_option("--eval-split", flags.eval_split, "train | validation | test");
    cmd->add_option("--ranker", flags.ranker,
                    "pretrained | ce | siamese-ce | random | lda");
    cmd->add_option("--checkpoint-stage", flags.checkpoint_stage,
                    "stage used by embed: pretrained | ce | siamese-ce");
    cmd->add_option("--priming-k-max", flags.priming_k_max, "largest k for P@k");
    cmd->add_flag("--exclude-query", flags.exclude_query,
                  "drop the query tag from ground truth and candidates");
    cmd->add_flag("--oov-queries", flags.oov_queries, "query with the reserved OOV tags");
    cmd->add_option("--completion-k", flags.completion_k, "NDCG horizon for tag completion");
    cmd->add_option("--embedding-format", flags.embedding_format, "jsonl | csv");
    cmd->add_option("--synthetic", flags.synthetic,
                    "generate a corpus during prepare: lda | communities");
    cmd->add_option("--synthetic-doc-count", flags.synthetic_doc_count, "generated documents");
    cmd->add_option("--synthetic-vocab-size", flags.synthetic_vocab_size,
                    "generated vocabulary (lda mode)");
    cmd->add_option("--synthetic-topic-count", flags.synthetic_topic_count,
                    "planted topics (lda mode)");
    cmd->add_option("--synthetic-community-tags", flags.synthetic_community_tags,
                    "tags per community (communities mode)");
    cmd->add_option("--synthetic-shared-tags", flags.synthetic_shared_tags,
                    "tags shared by both communities");
    cmd->add_option("--synthetic-min-doc-length", flags.synthetic_min_doc_length,
                    "minimum generated document length");
    cmd->add_option("--synthetic-max-doc-length", flags.synthetic_max_doc_length,
                    "maximum generated document length");
    cmd->add_option("--report-inputs", flags.report_inputs, "metric JSON files to summarize");
    cmd->add_option("--report-baseline", flags.report_baseline,
                    "baseline metric JSON for effect sizes");
  };

  add_common(app.add_subcommand("prepare", "load or generate the corpus and plan the splits"));
  add_common(app.add_subcommand("train-topics", "train the per-fold LDA topic models"));
  add_common(app.add_subcommand("pretrain", "layer-wise autoencoder initialization"));
  add_common(app.add_subcommand("train-predict", "prediction training (CE stage)"));
  add_common(app.add_subcommand("train-siamese", "siamese fine-tuning (Siamese-CE stage)"));
  add_common(app.add_subcommand("embed", "export contextual embeddings"));
  add_common(app.add_subcommand("prime", "semantic priming evaluation"));
  add_common(app.add_subcommand("complete", "tag completion evaluation"));
  add_common(app.add_subcommand("report", "summarize metric files with effect sizes"));

  CLI11_PARSE(app, argc, argv);

  // Resolve: defaults <- config file <- flags.
  char* defaults_text = tagsem_default_config();
  json config = json::parse(defaults_text);
  tagsem_string_free(defaults_text);

  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) {
      std::cerr << "error: cannot open config file: " << config_path << "\n";
      return 3;
    }
    json file_config;
    try {
      in >> file_config;
    } catch (const json::exception& e) {
      std::cerr << "error: invalid config file: " << e.what() << "\n";
      return 3;
    }
    for (const auto& [key, value] : file_config.items()) config[key] = value;
  }
  apply_overrides(config, flags);

  // Environment override for the artifact directory.
  if (const char* out_dir = std::getenv("TAGSEM_OUTPUT_DIR"); out_dir && *out_dir) {
    if (!flags.output_dir) config["output_dir"] = out_dir;
  }

  const std::string subcommand = app.get_subcommands().front()->get_name();
  const tagsem_status status = tagsem_run(subcommand.c_str(), config.dump().c_str());
  if (status != TAGSEM_OK) {
    std::cerr << "error (" << tagsem_status_name(status) << "): " << tagsem_last_error() << "\n";
  }
  return exit_code_for(status);
}
