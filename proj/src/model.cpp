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

#include "model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "error.hpp"
#include "rng.hpp"

namespace tagsem {

using nlohmann::json;

void EmbeddingModel::rebuild_vocab_index() {
  vocab_index.clear();
  vocab_index.reserve(vocabulary.size());
  for (size_t i = 0; i < vocabulary.size(); ++i) {
    vocab_index.emplace(vocabulary[i], static_cast<int>(i));
  }
}

void EmbeddingModel::compute_feature_standardization() {
  const int n = features.table.rows();
  feature_mean.assign(static_cast<size_t>(n), 0.0);
  feature_std.assign(static_cast<size_t>(n), 1.0);
  if (n == 0) return;
  for (int j = 0; j < n; ++j) {
    double mean = 0.0;
    for (int i = 0; i < n; ++i) mean += features.table(i, j);
    mean /= n;
    double var = 0.0;
    for (int i = 0; i < n; ++i) {
      const double d = features.table(i, j) - mean;
      var += d * d;
    }
    var /= n;
    feature_mean[static_cast<size_t>(j)] = mean;
    feature_std[static_cast<size_t>(j)] = var > 1e-24 ? std::sqrt(var) : 1.0;
  }
}

std::vector<int> EmbeddingModel::known_indices(const std::vector<std::string>& tags) const {
  std::vector<int> indices;
  indices.reserve(tags.size());
  for (const auto& tag : tags) {
    const int idx = tag_index(tag);
    if (idx >= 0) indices.push_back(idx);
  }
  std::sort(indices.begin(), indices.end());
  indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
  return indices;
}

Vector EmbeddingModel::context_for_indices(const std::vector<int>& indices) const {
  std::string label = "context:";
  for (const int idx : indices) {
    label += std::to_string(idx);
    label += ',';
  }
  return infer_context(topics, indices, derive_seed(rng_seed, label));
}

Vector EmbeddingModel::context_for_tags(const std::vector<std::string>& tags) const {
  return context_for_indices(known_indices(tags));
}

Vector EmbeddingModel::build_input(int tag_idx, const Vector& context) const {
  if (tag_idx < 0 || tag_idx >= vocab_size()) {
    throw Error(ErrorCode::kInvalidArgument, "tag index out of range");
  }
  const int n = features.table.cols();
  Vector x;
  x.reserve(static_cast<size_t>(n) + context.size());
  const double* row = features.table.row(tag_idx);
  if (standardize_features) {
    for (int j = 0; j < n; ++j) {
      x.push_back((row[j] - feature_mean[static_cast<size_t>(j)]) /
                  feature_std[static_cast<size_t>(j)]);
    }
  } else {
    x.insert(x.end(), row, row + n);
  }
  x.insert(x.end(), context.begin(), context.end());
  return x;
}

Vector EmbeddingModel::ce(int tag_idx, const Vector& context) const {
  const auto acts = net.forward(build_input(tag_idx, context));
  return acts[acts.size() - 2];
}

Vector EmbeddingModel::predict(int tag_idx, const Vector& context) const {
  const auto acts = net.forward(build_input(tag_idx, context));
  return acts.back();
}

Vector EmbeddingModel::predict_from_ce(const Vector& ce_vector) const {
  const Layer& out = net.layers.back();
  if (static_cast<int>(ce_vector.size()) != out.w.cols()) {
    throw Error(ErrorCode::kInvalidArgument, "embedding dimension mismatch");
  }
  Vector y(static_cast<size_t>(out.w.rows()));
  for (int i = 0; i < out.w.rows(); ++i) {
    const double* row = out.w.row(i);
    double a = out.b[static_cast<size_t>(i)];
    for (int j = 0; j < out.w.cols(); ++j) a += row[j] * ce_vector[static_cast<size_t>(j)];
    y[static_cast<size_t>(i)] = std::tanh(a);
  }
  return y;
}

namespace {

json hyper_to_json(const HyperParams& h) {
  return json{{"lambda", h.lambda},
              {"beta", h.beta},
              {"rho", h.rho},
              {"alpha", h.alpha},
              {"learning_rate", h.learning_rate},
              {"momentum", h.momentum},
              {"batch_size", h.batch_size},
              {"pair_batch_size", h.pair_batch_size},
              {"max_epochs", h.max_epochs},
              {"patience", h.patience},
              {"output_clamp", h.output_clamp},
              {"pretrain_epochs", h.pretrain_epochs},
              {"sparsity_weight", h.sparsity_weight},
              {"swap_kappa", h.swap_kappa},
              {"rng_seed", h.rng_seed}};
}

HyperParams hyper_from_json(const json& j) {
  HyperParams h;
  h.lambda = j.at("lambda").get<double>();
  h.beta = j.at("beta").get<double>();
  h.rho = j.at("rho").get<double>();
  h.alpha = j.at("alpha").get<double>();
  h.learning_rate = j.at("learning_rate").get<double>();
  h.momentum = j.at("momentum").get<double>();
  h.batch_size = j.at("batch_size").get<int>();
  h.pair_batch_size = j.at("pair_batch_size").get<int>();
  h.max_epochs = j.at("max_epochs").get<int>();
  h.patience = j.at("patience").get<int>();
  h.output_clamp = j.at("output_clamp").get<double>();
  h.pretrain_epochs = j.at("pretrain_epochs").get<int>();
  h.sparsity_weight = j.at("sparsity_weight").get<double>();
  h.swap_kappa = j.at("swap_kappa").get<bool>();
  h.rng_seed = j.at("rng_seed").get<uint64_t>();
  return h;
}

}  // namespace

void save_checkpoint(const EmbeddingModel& model, const std::string& path) {
  json doc;
  doc["format_version"] = 1;
  doc["stage"] = model.stage;
  doc["vocabulary"] = model.vocabulary;
  doc["layer_plan"] = model.layer_plan;
  doc["rng_seed"] = model.rng_seed;
  doc["hyperparams"] = hyper_to_json(model.hyper);

  doc["layers"] = json::array();
  for (const auto& layer : model.net.layers) {
    doc["layers"].push_back({{"rows", layer.w.rows()},
                             {"cols", layer.w.cols()},
                             {"weights", layer.w.data()},
                             {"bias", layer.b}});
  }

  doc["validation_history"] = json::array();
  for (const auto& entry : model.validation_history) {
    doc["validation_history"].push_back({{"epoch", entry.epoch},
                                         {"train_loss", entry.train_loss},
                                         {"p_at_2", entry.validation_p2}});
  }

  doc["tag_features"] = json{{"doc_count", model.features.stats.doc_count},
                             {"df", model.features.stats.df},
                             {"idf", model.features.stats.idf},
                             {"table", model.features.table.data()},
                             {"standardize", model.standardize_features},
                             {"feature_mean", model.feature_mean},
                             {"feature_std", model.feature_std}};

  doc["topic_model"] = json{{"topic_count", model.topics.topic_count},
                            {"vocab_size", model.topics.vocab_size},
                            {"doc_topic_prior", model.topics.doc_topic_prior},
                            {"topic_word_prior", model.topics.topic_word_prior},
                            {"sweeps", model.topics.sweeps},
                            {"rng_seed", model.topics.rng_seed},
                            {"infer_burnin", model.topics.infer_burnin},
                            {"infer_samples", model.topics.infer_samples},
                            {"counts", model.topics.topic_word_counts.data()},
                            {"topic_totals", model.topics.topic_totals}};

  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write checkpoint: " + path);
  out << doc.dump() << "\n";
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path);
}

EmbeddingModel load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kMissingInput, "missing checkpoint: " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, path + ": " + e.what());
  }

  EmbeddingModel model;
  try {
    model.stage = doc.at("stage").get<std::string>();
    model.vocabulary = doc.at("vocabulary").get<std::vector<std::string>>();
    model.layer_plan = doc.at("layer_plan").get<std::vector<int>>();
    model.rng_seed = doc.at("rng_seed").get<uint64_t>();
    model.hyper = hyper_from_json(doc.at("hyperparams"));

    for (const auto& lj : doc.at("layers")) {
      Layer layer;
      const int rows = lj.at("rows").get<int>();
      const int cols = lj.at("cols").get<int>();
      layer.w = Matrix(rows, cols);
      layer.w.data() = lj.at("weights").get<Vector>();
      if (static_cast<int>(layer.w.data().size()) != rows * cols) {
        throw Error(ErrorCode::kParse, "layer weight size mismatch in " + path);
      }
      layer.b = lj.at("bias").get<Vector>();
      if (static_cast<int>(layer.b.size()) != rows) {
        throw Error(ErrorCode::kParse, "layer bias size mismatch in " + path);
      }
      model.net.layers.push_back(std::move(layer));
    }

    for (const auto& ej : doc.at("validation_history")) {
      EpochLog entry;
      entry.epoch = ej.at("epoch").get<int>();
      entry.train_loss = ej.at("train_loss").get<double>();
      entry.validation_p2 = ej.at("p_at_2").get<double>();
      model.validation_history.push_back(entry);
    }

    const json& tf = doc.at("tag_features");
    model.features.stats.doc_count = tf.at("doc_count").get<int>();
    model.features.stats.df = tf.at("df").get<std::vector<int>>();
    model.features.stats.idf = tf.at("idf").get<Vector>();
    const int vocab = static_cast<int>(model.vocabulary.size());
    model.features.table = Matrix(vocab, vocab);
    model.features.table.data() = tf.at("table").get<Vector>();
    if (static_cast<int>(model.features.table.data().size()) != vocab * vocab) {
      throw Error(ErrorCode::kParse, "tag feature table size mismatch in " + path);
    }
    model.standardize_features = tf.at("standardize").get<bool>();
    model.feature_mean = tf.at("feature_mean").get<Vector>();
    model.feature_std = tf.at("feature_std").get<Vector>();

    const json& tm = doc.at("topic_model");
    model.topics.topic_count = tm.at("topic_count").get<int>();
    model.topics.vocab_size = tm.at("vocab_size").get<int>();
    model.topics.doc_topic_prior = tm.at("doc_topic_prior").get<double>();
    model.topics.topic_word_prior = tm.at("topic_word_prior").get<double>();
    model.topics.sweeps = tm.at("sweeps").get<int>();
    model.topics.rng_seed = tm.at("rng_seed").get<uint64_t>();
    model.topics.infer_burnin = tm.at("infer_burnin").get<int>();
    model.topics.infer_samples = tm.at("infer_samples").get<int>();
    model.topics.topic_word_counts = Matrix(model.topics.topic_count, model.topics.vocab_size);
    model.topics.topic_word_counts.data() = tm.at("counts").get<Vector>();
    if (static_cast<int>(model.topics.topic_word_counts.data().size()) !=
        model.topics.topic_count * model.topics.vocab_size) {
      throw Error(ErrorCode::kParse, "topic count matrix size mismatch in " + path);
    }
    model.topics.topic_totals = tm.at("topic_totals").get<Vector>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, path + ": " + e.what());
  }

  model.rebuild_vocab_index();
  return model;
}

}  // namespace tagsem
