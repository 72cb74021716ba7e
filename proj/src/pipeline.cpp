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

#include "pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <set>

#include "corpus.hpp"
#include "embed.hpp"
#include "error.hpp"
#include "evalkit.hpp"
#include "model.hpp"
#include "rng.hpp"
#include "tagfeat.hpp"

namespace tagsem {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::set<std::string> kSubcommands = {
    "prepare",    "train-topics",  "pretrain", "train-predict",
    "train-siamese", "embed",      "prime",    "complete",
    "report"};

template <typename T>
void read_field(const json& doc, const char* key, T* out) {
  const auto it = doc.find(key);
  if (it != doc.end()) *out = it->get<T>();
}

}  // namespace

json RunConfig::to_json() const {
  json doc;
  doc["corpus"] = corpus;
  doc["relevance"] = relevance;
  doc["output_dir"] = output_dir;
  doc["seed"] = seed;
  doc["fold_count"] = fold_count;
  doc["validation_fraction"] = validation_fraction;
  doc["oov_tag_count"] = oov_tag_count;

  doc["topic_count"] = lda.topic_count;
  doc["doc_topic_prior"] = lda.doc_topic_prior;
  doc["topic_word_prior"] = lda.topic_word_prior;
  doc["lda_sweeps"] = lda.sweeps;
  doc["lda_infer_burnin"] = lda.infer_burnin;
  doc["lda_infer_samples"] = lda.infer_samples;
  doc["estimate_priors"] = lda.estimate_priors;

  doc["layer_plan"] = layer_plan;
  doc["lambda"] = hyper.lambda;
  doc["beta"] = hyper.beta;
  doc["rho"] = hyper.rho;
  doc["alpha"] = hyper.alpha;
  doc["learning_rate"] = hyper.learning_rate;
  doc["momentum"] = hyper.momentum;
  doc["batch_size"] = hyper.batch_size;
  doc["pair_batch_size"] = hyper.pair_batch_size;
  doc["max_epochs"] = hyper.max_epochs;
  doc["patience"] = hyper.patience;
  doc["output_clamp"] = hyper.output_clamp;
  doc["pretrain_epochs"] = hyper.pretrain_epochs;
  doc["sparsity_weight"] = hyper.sparsity_weight;
  doc["swap_kappa"] = hyper.swap_kappa;
  doc["standardize_features"] = standardize_features;

  doc["ranking_mode"] = ranking_mode;
  doc["eval_split"] = eval_split;
  doc["ranker"] = ranker;
  doc["checkpoint_stage"] = checkpoint_stage;
  doc["priming_k_max"] = priming_k_max;
  doc["exclude_query"] = exclude_query;
  doc["oov_queries"] = oov_queries;
  doc["completion_k"] = completion_k;
  doc["embedding_format"] = embedding_format;

  doc["synthetic"] = synthetic;
  doc["synthetic_topic_count"] = synthetic_topic_count;
  doc["synthetic_vocab_size"] = synthetic_vocab_size;
  doc["synthetic_doc_count"] = synthetic_doc_count;
  doc["synthetic_min_doc_length"] = synthetic_min_doc_length;
  doc["synthetic_max_doc_length"] = synthetic_max_doc_length;
  doc["synthetic_community_tags"] = synthetic_community_tags;
  doc["synthetic_shared_tags"] = synthetic_shared_tags;

  doc["report_inputs"] = report_inputs;
  doc["report_baseline"] = report_baseline;
  return doc;
}

RunConfig RunConfig::from_json(const json& doc) {
  if (!doc.is_object()) throw Error(ErrorCode::kConfig, "config must be a JSON object");
  RunConfig config;
  const json defaults = config.to_json();
  std::vector<std::string> unknown;
  for (const auto& [key, value] : doc.items()) {
    if (!defaults.contains(key)) unknown.push_back(key);
  }
  if (!unknown.empty()) {
    std::string joined;
    for (const auto& key : unknown) {
      if (!joined.empty()) joined += ", ";
      joined += key;
    }
    throw Error(ErrorCode::kConfig, "unknown config keys: " + joined);
  }

  try {
    read_field(doc, "corpus", &config.corpus);
    read_field(doc, "relevance", &config.relevance);
    read_field(doc, "output_dir", &config.output_dir);
    read_field(doc, "seed", &config.seed);
    read_field(doc, "fold_count", &config.fold_count);
    read_field(doc, "validation_fraction", &config.validation_fraction);
    read_field(doc, "oov_tag_count", &config.oov_tag_count);

    read_field(doc, "topic_count", &config.lda.topic_count);
    read_field(doc, "doc_topic_prior", &config.lda.doc_topic_prior);
    read_field(doc, "topic_word_prior", &config.lda.topic_word_prior);
    read_field(doc, "lda_sweeps", &config.lda.sweeps);
    read_field(doc, "lda_infer_burnin", &config.lda.infer_burnin);
    read_field(doc, "lda_infer_samples", &config.lda.infer_samples);
    read_field(doc, "estimate_priors", &config.lda.estimate_priors);

    read_field(doc, "layer_plan", &config.layer_plan);
    read_field(doc, "lambda", &config.hyper.lambda);
    read_field(doc, "beta", &config.hyper.beta);
    read_field(doc, "rho", &config.hyper.rho);
    read_field(doc, "alpha", &config.hyper.alpha);
    read_field(doc, "learning_rate", &config.hyper.learning_rate);
    read_field(doc, "momentum", &config.hyper.momentum);
    read_field(doc, "batch_size", &config.hyper.batch_size);
    read_field(doc, "pair_batch_size", &config.hyper.pair_batch_size);
    read_field(doc, "max_epochs", &config.hyper.max_epochs);
    read_field(doc, "patience", &config.hyper.patience);
    read_field(doc, "output_clamp", &config.hyper.output_clamp);
    read_field(doc, "pretrain_epochs", &config.hyper.pretrain_epochs);
    read_field(doc, "sparsity_weight", &config.hyper.sparsity_weight);
    read_field(doc, "swap_kappa", &config.hyper.swap_kappa);
    read_field(doc, "standardize_features", &config.standardize_features);

    read_field(doc, "ranking_mode", &config.ranking_mode);
    read_field(doc, "eval_split", &config.eval_split);
    read_field(doc, "ranker", &config.ranker);
    read_field(doc, "checkpoint_stage", &config.checkpoint_stage);
    read_field(doc, "priming_k_max", &config.priming_k_max);
    read_field(doc, "exclude_query", &config.exclude_query);
    read_field(doc, "oov_queries", &config.oov_queries);
    read_field(doc, "completion_k", &config.completion_k);
    read_field(doc, "embedding_format", &config.embedding_format);

    read_field(doc, "synthetic", &config.synthetic);
    read_field(doc, "synthetic_topic_count", &config.synthetic_topic_count);
    read_field(doc, "synthetic_vocab_size", &config.synthetic_vocab_size);
    read_field(doc, "synthetic_doc_count", &config.synthetic_doc_count);
    read_field(doc, "synthetic_min_doc_length", &config.synthetic_min_doc_length);
    read_field(doc, "synthetic_max_doc_length", &config.synthetic_max_doc_length);
    read_field(doc, "synthetic_community_tags", &config.synthetic_community_tags);
    read_field(doc, "synthetic_shared_tags", &config.synthetic_shared_tags);

    read_field(doc, "report_inputs", &config.report_inputs);
    read_field(doc, "report_baseline", &config.report_baseline);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("invalid config value: ") + e.what());
  }

  // The run seed also seeds the network stages.
  config.hyper.rng_seed = config.seed;
  return config;
}

void RunConfig::validate() const {
  std::vector<std::string> violations;
  const auto check = [&](bool ok, const std::string& message) {
    if (!ok) violations.push_back(message);
  };
  check(fold_count >= 2, "fold_count must be >= 2");
  check(validation_fraction > 0.0 && validation_fraction < 1.0,
        "validation_fraction must be in (0, 1)");
  check(oov_tag_count >= 0, "oov_tag_count must be >= 0");
  check(lda.topic_count >= 1, "topic_count must be >= 1");
  check(lda.sweeps >= 1, "lda_sweeps must be >= 1");
  check(lda.infer_burnin >= 0 && lda.infer_samples >= 0, "lda inference sweeps must be >= 0");
  check(!layer_plan.empty(), "layer_plan must list at least one hidden layer");
  for (const int width : layer_plan) check(width >= 1, "layer widths must be >= 1");
  check(ranking_mode == "prediction" || ranking_mode == "distance",
        "ranking_mode must be prediction or distance");
  check(eval_split == "train" || eval_split == "validation" || eval_split == "test",
        "eval_split must be train, validation or test");
  check(ranker == "pretrained" || ranker == "ce" || ranker == "siamese-ce" ||
            ranker == "random" || ranker == "lda",
        "ranker must be pretrained, ce, siamese-ce, random or lda");
  check(checkpoint_stage == "pretrained" || checkpoint_stage == "ce" ||
            checkpoint_stage == "siamese-ce",
        "checkpoint_stage must be pretrained, ce or siamese-ce");
  check(priming_k_max >= 2, "priming_k_max must be >= 2");
  check(completion_k >= 1, "completion_k must be >= 1");
  check(embedding_format == "jsonl" || embedding_format == "csv",
        "embedding_format must be jsonl or csv");
  check(synthetic.empty() || synthetic == "lda" || synthetic == "communities",
        "synthetic must be empty, lda or communities");

  try {
    hyper.validate();
  } catch (const Error& e) {
    violations.push_back(e.what());
  }

  if (!violations.empty()) {
    std::string joined;
    for (const auto& violation : violations) {
      if (!joined.empty()) joined += "; ";
      joined += violation;
    }
    throw Error(ErrorCode::kConfig, "invalid configuration: " + joined);
  }
}

std::string RunConfig::artifact(const std::string& name) const {
  return (fs::path(output_dir) / name).string();
}

namespace {

void echo_config(const RunConfig& config) {
  fs::create_directories(config.output_dir);
  std::ofstream out(config.artifact("config.json"));
  if (!out) throw Error(ErrorCode::kIo, "cannot write resolved config");
  out << config.to_json().dump(2) << "\n";
}

void note_artifact(const std::string& path) { std::cout << "wrote " << path << "\n"; }

Corpus load_input_corpus(const RunConfig& config) {
  if (config.corpus.empty()) {
    throw Error(ErrorCode::kConfig, "no corpus path configured");
  }
  if (!fs::exists(config.corpus)) {
    throw Error(ErrorCode::kMissingInput, "missing corpus file: " + config.corpus);
  }
  return load_corpus(config.corpus);
}

SplitPlan load_plan(const RunConfig& config) {
  const std::string path = config.artifact("split_plan.json");
  if (!fs::exists(path)) {
    throw Error(ErrorCode::kMissingInput, "missing split plan: " + path + " (run prepare first)");
  }
  return load_split_plan(path);
}

OovReservation reservation_of(const SplitPlan& plan) {
  return OovReservation{plan.reserved_oov_tags, plan.oov_document_ids};
}

std::string topics_path(const RunConfig& config, int fold) {
  return config.artifact("topics.fold" + std::to_string(fold) + ".json");
}

std::string checkpoint_path(const RunConfig& config, const std::string& stage, int fold) {
  return config.artifact("model." + stage + ".fold" + std::to_string(fold) + ".json");
}

TopicModel load_fold_topics(const RunConfig& config, int fold) {
  const std::string path = topics_path(config, fold);
  if (!fs::exists(path)) {
    throw Error(ErrorCode::kMissingInput,
                "missing topic model: " + path + " (run train-topics first)");
  }
  return load_topic_model(path);
}

EmbeddingModel load_fold_checkpoint(const RunConfig& config, const std::string& stage,
                                    int fold) {
  const std::string path = checkpoint_path(config, stage, fold);
  if (!fs::exists(path)) {
    const std::string producer = stage == "pretrained"  ? "pretrain"
                                 : stage == "ce"        ? "train-predict"
                                                        : "train-siamese";
    throw Error(ErrorCode::kMissingInput,
                "missing checkpoint: " + path + " (run " + producer + " first)");
  }
  return load_checkpoint(path);
}

std::vector<DocView> doc_views(const Corpus& corpus, const std::vector<std::string>& ids) {
  std::unordered_map<std::string, const Document*> by_id;
  for (const auto& doc : corpus.documents) by_id.emplace(doc.id, &doc);
  std::vector<DocView> views;
  views.reserve(ids.size());
  for (const auto& id : ids) {
    const auto it = by_id.find(id);
    if (it == by_id.end()) {
      throw Error(ErrorCode::kValidation, "split references unknown document: " + id);
    }
    views.push_back({id, it->second->tags});
  }
  return views;
}

const std::vector<std::string>& split_ids(const Fold& fold, const std::string& split) {
  if (split == "train") return fold.train;
  if (split == "validation") return fold.validation;
  return fold.test;
}

/// Assembles the training dataset of a fold: positive and negative examples
/// with precomputed inputs, targets and contexts. Negatives are drawn from a
/// stream seeded per fold, so the set is fixed across stages and reruns.
std::vector<NetInput> build_dataset(const EmbeddingModel& bundle, const Corpus& working,
                                    const std::vector<std::string>& train_ids,
                                    uint64_t negatives_seed) {
  Rng negative_rng(negatives_seed);
  std::unordered_map<std::string, const Document*> by_id;
  for (const auto& doc : working.documents) by_id.emplace(doc.id, &doc);

  std::vector<NetInput> data;
  for (const auto& id : train_ids) {
    const auto it = by_id.find(id);
    if (it == by_id.end()) {
      throw Error(ErrorCode::kValidation, "train split references unknown document: " + id);
    }
    const std::vector<int> indices = working.tag_indices(*it->second);
    if (indices.empty()) continue;
    auto context = std::make_shared<const Vector>(bundle.context_for_indices(indices));
    const auto examples = make_training_examples(indices, id, context,
                                                 bundle.vocab_size(), negative_rng);
    for (const auto& example : examples) {
      NetInput input;
      input.x = bundle.build_input(example.tag_index, *context);
      input.target = example_target(example, bundle.vocab_size());
      input.kappa = example.kappa;
      input.positive = example.positive;
      input.context = *context;
      data.push_back(std::move(input));
    }
  }
  if (data.empty()) throw Error(ErrorCode::kValidation, "no training examples in fold");
  return data;
}

ValidationFn make_validation_fn(const EmbeddingModel& bundle,
                                std::vector<DocView> validation_docs) {
  auto shared = std::make_shared<EmbeddingModel>(bundle);
  return [shared, docs = std::move(validation_docs)](const Network& net) -> double {
    shared->net = net;
    ModelRanker ranker(*shared, RankingMode::kPrediction);
    PrimingOptions options;
    options.k_max = 2;
    const PrimingFold fold = run_priming_fold(ranker, docs, options);
    return fold.p_at_k[1];
  };
}

void cmd_prepare(RunConfig config) {
  fs::create_directories(config.output_dir);

  if (!config.synthetic.empty()) {
    RelevanceTable relevance;
    Corpus corpus;
    if (config.synthetic == "lda") {
      auto generated = generate_synthetic(
          config.synthetic_topic_count, config.synthetic_vocab_size,
          config.synthetic_doc_count, config.synthetic_min_doc_length,
          config.synthetic_max_doc_length, derive_seed(config.seed, "synthetic"));
      corpus = std::move(generated.corpus);
      relevance = std::move(generated.relevance);
    } else {
      auto generated = generate_communities(
          config.synthetic_community_tags, config.synthetic_shared_tags,
          config.synthetic_doc_count, config.synthetic_min_doc_length,
          config.synthetic_max_doc_length, derive_seed(config.seed, "synthetic"));
      corpus = std::move(generated.corpus);
      relevance = std::move(generated.relevance);
    }
    config.corpus = config.artifact("corpus.jsonl");
    config.relevance = config.artifact("relevance.jsonl");
    save_corpus(corpus, config.corpus);
    note_artifact(config.corpus);
    save_relevance(relevance, config.relevance);
    note_artifact(config.relevance);
  }

  const Corpus corpus = load_input_corpus(config);
  const OovReservation reservation =
      reserve_oov(corpus, config.oov_tag_count, derive_seed(config.seed, "oov"));
  const SplitPlan plan = make_folds(corpus, reservation, config.fold_count,
                                    config.validation_fraction, derive_seed(config.seed, "folds"));
  save_split_plan(plan, config.artifact("split_plan.json"));
  note_artifact(config.artifact("split_plan.json"));
  echo_config(config);
}

void cmd_train_topics(const RunConfig& config) {
  const SplitPlan plan = load_plan(config);
  const Corpus corpus = load_input_corpus(config);
  const Corpus working = apply_reservation(corpus, reservation_of(plan));

  for (int fold = 0; fold < plan.fold_count; ++fold) {
    const Corpus train = subset_documents(working, plan.folds[static_cast<size_t>(fold)].train);
    const TopicModel model =
        train_lda(train, config.lda, derive_seed(config.seed, "lda-fold" + std::to_string(fold)));
    save_topic_model(model, topics_path(config, fold));
    note_artifact(topics_path(config, fold));
  }
  echo_config(config);
}

void cmd_pretrain(const RunConfig& config) {
  const SplitPlan plan = load_plan(config);
  const Corpus corpus = load_input_corpus(config);
  const Corpus working = apply_reservation(corpus, reservation_of(plan));

  for (int fold = 0; fold < plan.fold_count; ++fold) {
    const auto& fold_plan = plan.folds[static_cast<size_t>(fold)];
    const Corpus train = subset_documents(working, fold_plan.train);

    EmbeddingModel bundle;
    bundle.stage = "pretrained";
    bundle.vocabulary = working.vocabulary;
    bundle.rebuild_vocab_index();
    bundle.layer_plan = config.layer_plan;
    bundle.hyper = config.hyper;
    bundle.rng_seed = derive_seed(config.seed, "fold" + std::to_string(fold));
    bundle.features = build_tag_features(train);
    bundle.standardize_features = config.standardize_features;
    bundle.compute_feature_standardization();
    bundle.topics = load_fold_topics(config, fold);

    const std::vector<NetInput> dataset = build_dataset(
        bundle, working, fold_plan.train,
        derive_seed(config.seed, "negatives-fold" + std::to_string(fold)));
    std::vector<Vector> inputs;
    inputs.reserve(dataset.size());
    for (const auto& example : dataset) inputs.push_back(example.x);

    const int input_size = bundle.vocab_size() + bundle.topics.topic_count;
    bundle.net = pretrain_autoencoders(input_size, config.layer_plan, bundle.vocab_size(),
                                       inputs, config.hyper,
                                       derive_seed(bundle.rng_seed, "pretrain"));
    save_checkpoint(bundle, checkpoint_path(config, "pretrained", fold));
    note_artifact(checkpoint_path(config, "pretrained", fold));
  }
  echo_config(config);
}

void train_stage(const RunConfig& config, const std::string& from_stage,
                 const std::string& to_stage) {
  const SplitPlan plan = load_plan(config);
  const Corpus corpus = load_input_corpus(config);
  const Corpus working = apply_reservation(corpus, reservation_of(plan));

  for (int fold = 0; fold < plan.fold_count; ++fold) {
    const auto& fold_plan = plan.folds[static_cast<size_t>(fold)];
    EmbeddingModel bundle = load_fold_checkpoint(config, from_stage, fold);
    if (bundle.stage != from_stage) {
      throw Error(ErrorCode::kValidation, "checkpoint stage mismatch: expected " + from_stage +
                                              ", found " + bundle.stage);
    }

    const std::vector<NetInput> dataset = build_dataset(
        bundle, working, fold_plan.train,
        derive_seed(config.seed, "negatives-fold" + std::to_string(fold)));
    const ValidationFn validation =
        make_validation_fn(bundle, doc_views(corpus, fold_plan.validation));

    TrainOutcome outcome;
    if (to_stage == "ce") {
      outcome = train_prediction(bundle.net, dataset, config.hyper,
                                 derive_seed(bundle.rng_seed, "train-predict"), validation);
    } else {
      outcome = train_siamese(bundle.net, dataset, config.hyper,
                              derive_seed(bundle.rng_seed, "train-siamese"), validation);
    }
    if (outcome.diverged) {
      std::cerr << "warning: training diverged in fold " << fold
                << "; keeping the last finite checkpoint\n";
    }

    bundle.net = outcome.network;
    bundle.stage = to_stage;
    bundle.validation_history.insert(bundle.validation_history.end(), outcome.history.begin(),
                                     outcome.history.end());
    save_checkpoint(bundle, checkpoint_path(config, to_stage, fold));
    note_artifact(checkpoint_path(config, to_stage, fold));
  }
  echo_config(config);
}

void cmd_embed(const RunConfig& config) {
  const SplitPlan plan = load_plan(config);
  const Corpus corpus = load_input_corpus(config);

  for (int fold = 0; fold < plan.fold_count; ++fold) {
    const EmbeddingModel bundle = load_fold_checkpoint(config, config.checkpoint_stage, fold);
    std::vector<EmbeddingRecord> records;

    if (config.oov_queries) {
      const std::vector<DocView> docs = doc_views(corpus, plan.oov_document_ids);
      const std::unordered_set<std::string> reserved(plan.reserved_oov_tags.begin(),
                                                     plan.reserved_oov_tags.end());
      for (const auto& doc : docs) {
        for (const auto& tag : doc.tags) {
          if (!reserved.count(tag)) continue;
          if (bundle.known_indices(doc.tags).empty()) continue;
          records.push_back(embed_oov(bundle, tag, doc.tags, doc.id));
        }
      }
    } else {
      const std::vector<DocView> docs = doc_views(
          corpus, split_ids(plan.folds[static_cast<size_t>(fold)], config.eval_split));
      for (const auto& doc : docs) {
        for (const auto& tag : doc.tags) {
          if (bundle.tag_index(tag) < 0) continue;
          records.push_back(embed_in_context(bundle, tag, doc.tags, doc.id));
        }
      }
    }

    const EmbeddingFormat format = config.embedding_format == "csv" ? EmbeddingFormat::kCsv
                                                                    : EmbeddingFormat::kJsonl;
    const std::string extension = config.embedding_format == "csv" ? ".csv" : ".jsonl";
    const std::string path =
        config.artifact("embeddings." + config.checkpoint_stage + ".fold" +
                        std::to_string(fold) + (config.oov_queries ? ".oov" : "") + extension);
    export_embeddings(records, path, format);
    note_artifact(path);
  }
  echo_config(config);
}

std::string metric_basename(const RunConfig& config, const std::string& kind) {
  std::string name = kind + "." + config.ranker;
  const bool model_ranker =
      config.ranker == "pretrained" || config.ranker == "ce" || config.ranker == "siamese-ce";
  if (model_ranker) name += "." + config.ranking_mode;
  if (config.oov_queries) name += ".oov";
  return name;
}

/// Builds the fold's ranker. Model rankers load the fold checkpoint; the
/// random and LDA baselines share the working vocabulary.
std::unique_ptr<Ranker> make_ranker(const RunConfig& config, const Corpus& working, int fold,
                                    std::vector<EmbeddingModel>& keep_models,
                                    std::vector<TopicModel>& keep_topics) {
  if (config.ranker == "random") {
    return std::make_unique<RandomRanker>(working.vocabulary,
                                          derive_seed(config.seed, "random-ranker"));
  }
  if (config.ranker == "lda") {
    keep_topics.push_back(load_fold_topics(config, fold));
    return std::make_unique<LdaRanker>(keep_topics.back(), working.vocabulary,
                                       derive_seed(config.seed, "lda-ranker"));
  }
  keep_models.push_back(load_fold_checkpoint(config, config.ranker, fold));
  const RankingMode mode = config.ranking_mode == "distance" ? RankingMode::kDistance
                                                             : RankingMode::kPrediction;
  return std::make_unique<ModelRanker>(keep_models.back(), mode);
}

void cmd_prime(const RunConfig& config) {
  const SplitPlan plan = load_plan(config);
  const Corpus corpus = load_input_corpus(config);
  const Corpus working = apply_reservation(corpus, reservation_of(plan));

  PrimingOptions options;
  options.k_max = config.priming_k_max;
  options.exclude_query = config.exclude_query;
  options.oov_queries = config.oov_queries;
  options.reserved_tags = plan.reserved_oov_tags;
  if (options.oov_queries && plan.reserved_oov_tags.empty()) {
    throw Error(ErrorCode::kConfig, "oov_queries requires a split plan with reserved tags");
  }

  std::vector<PrimingFold> folds;
  std::vector<EmbeddingModel> keep_models;
  std::vector<TopicModel> keep_topics;
  keep_models.reserve(static_cast<size_t>(plan.fold_count));
  keep_topics.reserve(static_cast<size_t>(plan.fold_count));
  for (int fold = 0; fold < plan.fold_count; ++fold) {
    const auto ranker = make_ranker(config, working, fold, keep_models, keep_topics);
    const std::vector<DocView> docs =
        config.oov_queries
            ? doc_views(corpus, plan.oov_document_ids)
            : doc_views(corpus, split_ids(plan.folds[static_cast<size_t>(fold)],
                                          config.eval_split));
    folds.push_back(run_priming_fold(*ranker, docs, options));
  }

  const PrimingReport report = aggregate_priming(std::move(folds));
  const std::string base = metric_basename(config, "priming");
  write_priming_csv(report, config.artifact(base + ".csv"));
  note_artifact(config.artifact(base + ".csv"));
  write_priming_json(report, config.artifact(base + ".json"));
  note_artifact(config.artifact(base + ".json"));
  write_pr_curve_csv(report, config.artifact("pr_curve." + config.ranker +
                                             (config.oov_queries ? ".oov" : "") + ".csv"));
  note_artifact(config.artifact("pr_curve." + config.ranker +
                                (config.oov_queries ? ".oov" : "") + ".csv"));
  echo_config(config);
}

void cmd_complete(const RunConfig& config) {
  const SplitPlan plan = load_plan(config);
  const Corpus corpus = load_input_corpus(config);
  const Corpus working = apply_reservation(corpus, reservation_of(plan));

  if (config.relevance.empty()) {
    throw Error(ErrorCode::kConfig, "tag completion requires a relevance path");
  }
  if (!fs::exists(config.relevance)) {
    throw Error(ErrorCode::kMissingInput, "missing relevance file: " + config.relevance);
  }
  const RelevanceTable relevance = load_relevance(config.relevance, corpus);

  std::vector<CompletionFold> folds;
  std::vector<EmbeddingModel> keep_models;
  std::vector<TopicModel> keep_topics;
  keep_models.reserve(static_cast<size_t>(plan.fold_count));
  keep_topics.reserve(static_cast<size_t>(plan.fold_count));
  for (int fold = 0; fold < plan.fold_count; ++fold) {
    const auto ranker = make_ranker(config, working, fold, keep_models, keep_topics);
    const std::vector<DocView> docs = doc_views(
        corpus, split_ids(plan.folds[static_cast<size_t>(fold)], config.eval_split));
    folds.push_back(run_completion_fold(*ranker, docs, relevance, config.completion_k));
  }

  const CompletionReport report = aggregate_completion(std::move(folds));
  const std::string base = metric_basename(config, "completion");
  write_completion_csv(report, config.artifact(base + ".csv"));
  note_artifact(config.artifact(base + ".csv"));
  write_completion_json(report, config.artifact(base + ".json"));
  note_artifact(config.artifact(base + ".json"));
  echo_config(config);
}

/// Per-fold scalar metrics extracted from a priming or completion JSON.
std::map<std::string, Vector> metrics_from_summary(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kMissingInput, "missing metrics file: " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, path + ": " + e.what());
  }
  std::map<std::string, Vector> metrics;
  for (const auto& fold : doc.at("folds")) {
    if (fold.contains("map")) {
      metrics["map"].push_back(fold.at("map").get<double>());
      metrics["auc"].push_back(fold.at("auc").get<double>());
      const auto p_at_k = fold.at("p_at_k").get<Vector>();
      for (size_t k = 0; k < p_at_k.size(); ++k) {
        metrics["p_at_" + std::to_string(k + 1)].push_back(p_at_k[k]);
      }
    }
    if (fold.contains("averaging_ndcg")) {
      metrics["averaging_ndcg"].push_back(fold.at("averaging_ndcg").get<double>());
    }
  }
  return metrics;
}

void cmd_report(const RunConfig& config) {
  if (config.report_inputs.empty()) {
    throw Error(ErrorCode::kConfig, "report requires report_inputs");
  }
  std::map<std::string, Vector> baseline;
  if (!config.report_baseline.empty()) {
    baseline = metrics_from_summary(config.report_baseline);
  }

  json summary = json::array();
  fs::create_directories(config.output_dir);
  std::ofstream csv(config.artifact("report.csv"));
  if (!csv) throw Error(ErrorCode::kIo, "cannot write report.csv");
  csv << "input,metric,mean,standard_error,cohens_d,t_statistic\n";

  const auto g17 = [](double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };

  for (const auto& input : config.report_inputs) {
    const auto metrics = metrics_from_summary(input);
    for (const auto& [name, values] : metrics) {
      double mean = 0.0;
      for (const double v : values) mean += v;
      mean /= static_cast<double>(values.size());
      double se = 0.0;
      if (values.size() > 1) {
        double var = 0.0;
        for (const double v : values) var += (v - mean) * (v - mean);
        var /= static_cast<double>(values.size() - 1);
        se = std::sqrt(var / static_cast<double>(values.size()));
      }

      json row;
      row["input"] = input;
      row["metric"] = name;
      row["mean"] = mean;
      row["standard_error"] = se;
      std::string d_text;
      std::string t_text;
      const auto base_it = baseline.find(name);
      if (base_it != baseline.end() && values.size() >= 2 && base_it->second.size() >= 2) {
        try {
          const EffectSize effect = effect_size(values, base_it->second);
          row["cohens_d"] = effect.cohens_d;
          row["t_statistic"] = effect.t_statistic;
          d_text = g17(effect.cohens_d);
          t_text = g17(effect.t_statistic);
        } catch (const Error&) {
          // Degenerate samples: leave the effect columns empty.
        }
      }
      csv << input << "," << name << "," << g17(mean) << "," << g17(se) << "," << d_text << ","
          << t_text << "\n";
      summary.push_back(std::move(row));
    }
  }
  if (!csv) throw Error(ErrorCode::kIo, "write failed: report.csv");
  note_artifact(config.artifact("report.csv"));

  std::ofstream js(config.artifact("report.json"));
  if (!js) throw Error(ErrorCode::kIo, "cannot write report.json");
  js << summary.dump(2) << "\n";
  note_artifact(config.artifact("report.json"));
  echo_config(config);
}

}  // namespace

void run_command(const std::string& subcommand, const RunConfig& config) {
  if (!kSubcommands.count(subcommand)) {
    throw Error(ErrorCode::kInvalidArgument, "unknown subcommand: " + subcommand);
  }
  config.validate();

  if (subcommand == "prepare") {
    cmd_prepare(config);
  } else if (subcommand == "train-topics") {
    cmd_train_topics(config);
  } else if (subcommand == "pretrain") {
    cmd_pretrain(config);
  } else if (subcommand == "train-predict") {
    train_stage(config, "pretrained", "ce");
  } else if (subcommand == "train-siamese") {
    train_stage(config, "ce", "siamese-ce");
  } else if (subcommand == "embed") {
    cmd_embed(config);
  } else if (subcommand == "prime") {
    cmd_prime(config);
  } else if (subcommand == "complete") {
    cmd_complete(config);
  } else if (subcommand == "report") {
    cmd_report(config);
  }
}

}  // namespace tagsem
