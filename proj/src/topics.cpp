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

#include "topics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "error.hpp"
#include "rng.hpp"

namespace tagsem {

namespace {

double digamma(double x) {
  // Asymptotic expansion with recurrence shift, accurate enough for the
  // fixed-point prior updates.
  double result = 0.0;
  while (x < 6.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  result += std::log(x) - 0.5 * inv -
            inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 / 252.0));
  return result;
}

int sample_categorical(const Vector& unnormalized, double total, Rng& rng) {
  double u = rng.uniform01() * total;
  for (size_t k = 0; k < unnormalized.size(); ++k) {
    u -= unnormalized[k];
    if (u < 0.0) return static_cast<int>(k);
  }
  return static_cast<int>(unnormalized.size()) - 1;
}

/// Minka fixed-point update for a symmetric Dirichlet prior given grouped
/// counts: maximizes the Polya likelihood of `counts[g][k]` rows.
double minka_update(const std::vector<std::vector<int>>& counts, double alpha,
                    int iterations) {
  const size_t groups = counts.size();
  if (groups == 0) return alpha;
  const size_t dims = counts[0].size();
  for (int it = 0; it < iterations; ++it) {
    double numerator = 0.0;
    double denominator = 0.0;
    for (const auto& row : counts) {
      int row_total = 0;
      for (size_t k = 0; k < dims; ++k) {
        numerator += digamma(row[k] + alpha) - digamma(alpha);
        row_total += row[k];
      }
      denominator += dims * (digamma(row_total + dims * alpha) - digamma(dims * alpha));
    }
    if (denominator <= 0.0 || numerator <= 0.0) break;
    const double next = alpha * numerator / denominator;
    if (!(next > 1e-8) || !std::isfinite(next)) break;
    alpha = next;
  }
  return alpha;
}

}  // namespace

TopicModel train_lda(const Corpus& training, const LdaConfig& config, uint64_t seed) {
  if (config.topic_count < 1) {
    throw Error(ErrorCode::kInvalidArgument, "topic count must be >= 1");
  }
  for (const auto& doc : training.documents) {
    if (training.tag_indices(doc).empty()) {
      throw Error(ErrorCode::kValidation, "training document with no in-vocabulary tags: " + doc.id);
    }
  }

  const int topics = config.topic_count;
  const int vocab = static_cast<int>(training.vocabulary.size());

  TopicModel model;
  model.topic_count = topics;
  model.vocab_size = vocab;
  model.doc_topic_prior = config.resolved_doc_topic_prior();
  model.topic_word_prior = config.topic_word_prior;
  model.sweeps = config.sweeps;
  model.rng_seed = seed;
  model.infer_burnin = config.infer_burnin;
  model.infer_samples = config.infer_samples;
  model.topic_word_counts = Matrix(topics, vocab, 0.0);
  model.topic_totals.assign(static_cast<size_t>(topics), 0.0);

  // Token streams per document (each tag once, set semantics).
  std::vector<std::vector<int>> doc_tokens;
  doc_tokens.reserve(training.documents.size());
  for (const auto& doc : training.documents) doc_tokens.push_back(training.tag_indices(doc));

  Rng rng(seed);
  std::vector<std::vector<int>> assignments(doc_tokens.size());
  std::vector<std::vector<int>> doc_topic_counts(doc_tokens.size(),
                                                 std::vector<int>(static_cast<size_t>(topics), 0));
  for (size_t d = 0; d < doc_tokens.size(); ++d) {
    assignments[d].resize(doc_tokens[d].size());
    for (size_t n = 0; n < doc_tokens[d].size(); ++n) {
      const int topic = static_cast<int>(rng.uniform_int(static_cast<uint64_t>(topics)));
      assignments[d][n] = topic;
      ++doc_topic_counts[d][static_cast<size_t>(topic)];
      model.topic_word_counts(topic, doc_tokens[d][n]) += 1.0;
      model.topic_totals[static_cast<size_t>(topic)] += 1.0;
    }
  }

  double alpha = model.doc_topic_prior;
  double beta = model.topic_word_prior;
  Vector weights(static_cast<size_t>(topics));
  for (int sweep = 0; sweep < config.sweeps; ++sweep) {
    for (size_t d = 0; d < doc_tokens.size(); ++d) {
      for (size_t n = 0; n < doc_tokens[d].size(); ++n) {
        const int word = doc_tokens[d][n];
        const int old_topic = assignments[d][n];
        --doc_topic_counts[d][static_cast<size_t>(old_topic)];
        model.topic_word_counts(old_topic, word) -= 1.0;
        model.topic_totals[static_cast<size_t>(old_topic)] -= 1.0;

        double total = 0.0;
        for (int k = 0; k < topics; ++k) {
          const double w = (doc_topic_counts[d][static_cast<size_t>(k)] + alpha) *
                           (model.topic_word_counts(k, word) + beta) /
                           (model.topic_totals[static_cast<size_t>(k)] + vocab * beta);
          weights[static_cast<size_t>(k)] = w;
          total += w;
        }
        const int new_topic = sample_categorical(weights, total, rng);
        assignments[d][n] = new_topic;
        ++doc_topic_counts[d][static_cast<size_t>(new_topic)];
        model.topic_word_counts(new_topic, word) += 1.0;
        model.topic_totals[static_cast<size_t>(new_topic)] += 1.0;
      }
    }

    if (config.estimate_priors && sweep >= 20 && sweep % 20 == 0) {
      alpha = minka_update(doc_topic_counts, alpha, 5);
      std::vector<std::vector<int>> word_counts(
          static_cast<size_t>(topics), std::vector<int>(static_cast<size_t>(vocab), 0));
      for (int k = 0; k < topics; ++k) {
        for (int w = 0; w < vocab; ++w) {
          word_counts[static_cast<size_t>(k)][static_cast<size_t>(w)] =
              static_cast<int>(model.topic_word_counts(k, w));
        }
      }
      beta = minka_update(word_counts, beta, 5);
    }
  }

  model.doc_topic_prior = alpha;
  model.topic_word_prior = beta;
  return model;
}

Vector infer_context(const TopicModel& model, const std::vector<int>& tag_indices,
                     uint64_t seed) {
  if (tag_indices.empty()) {
    throw Error(ErrorCode::kValidation, "no in-vocabulary tags for context");
  }
  const int topics = model.topic_count;
  if (topics == 1) return Vector{1.0};

  Rng rng(seed);
  const size_t n_tokens = tag_indices.size();
  std::vector<int> assignment(n_tokens);
  Vector local_counts(static_cast<size_t>(topics), 0.0);
  for (size_t n = 0; n < n_tokens; ++n) {
    const int topic = static_cast<int>(rng.uniform_int(static_cast<uint64_t>(topics)));
    assignment[n] = topic;
    local_counts[static_cast<size_t>(topic)] += 1.0;
  }

  const double alpha = model.doc_topic_prior;
  const double beta = model.topic_word_prior;
  const int vocab = model.vocab_size;
  Vector weights(static_cast<size_t>(topics));
  Vector accumulated(static_cast<size_t>(topics), 0.0);
  const int total_sweeps = model.infer_burnin + model.infer_samples;

  for (int sweep = 0; sweep < total_sweeps; ++sweep) {
    for (size_t n = 0; n < n_tokens; ++n) {
      const int word = tag_indices[n];
      const int old_topic = assignment[n];
      local_counts[static_cast<size_t>(old_topic)] -= 1.0;

      double total = 0.0;
      for (int k = 0; k < topics; ++k) {
        const double w = (local_counts[static_cast<size_t>(k)] + alpha) *
                         (model.topic_word_counts(k, word) + beta) /
                         (model.topic_totals[static_cast<size_t>(k)] + vocab * beta);
        weights[static_cast<size_t>(k)] = w;
        total += w;
      }
      const int new_topic = sample_categorical(weights, total, rng);
      assignment[n] = new_topic;
      local_counts[static_cast<size_t>(new_topic)] += 1.0;
    }
    if (sweep >= model.infer_burnin) {
      for (int k = 0; k < topics; ++k) {
        accumulated[static_cast<size_t>(k)] +=
            (local_counts[static_cast<size_t>(k)] + alpha) /
            (static_cast<double>(n_tokens) + topics * alpha);
      }
    }
  }

  const int samples = std::max(model.infer_samples, 1);
  double total = 0.0;
  for (auto& v : accumulated) {
    v /= samples;
    total += v;
  }
  if (total <= 0.0) {
    // No sample sweeps configured: fall back to the final state proportions.
    for (int k = 0; k < topics; ++k) {
      accumulated[static_cast<size_t>(k)] =
          (local_counts[static_cast<size_t>(k)] + alpha) /
          (static_cast<double>(n_tokens) + topics * alpha);
      total += accumulated[static_cast<size_t>(k)];
    }
  }
  for (auto& v : accumulated) v /= total;
  return accumulated;
}

Vector infer_context(const TopicModel& model, const Corpus& vocab_source,
                     const std::vector<std::string>& tags, uint64_t seed) {
  std::vector<int> indices;
  for (const auto& tag : tags) {
    const int idx = vocab_source.tag_index(tag);
    if (idx >= 0 && idx < model.vocab_size) indices.push_back(idx);
  }
  std::sort(indices.begin(), indices.end());
  indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
  return infer_context(model, indices, seed);
}

void save_topic_model(const TopicModel& model, const std::string& path) {
  nlohmann::json doc;
  doc["format_version"] = 1;
  doc["topic_count"] = model.topic_count;
  doc["vocab_size"] = model.vocab_size;
  doc["doc_topic_prior"] = model.doc_topic_prior;
  doc["topic_word_prior"] = model.topic_word_prior;
  doc["sweeps"] = model.sweeps;
  doc["rng_seed"] = model.rng_seed;
  doc["infer_burnin"] = model.infer_burnin;
  doc["infer_samples"] = model.infer_samples;
  doc["counts"] = model.topic_word_counts.data();
  doc["topic_totals"] = model.topic_totals;
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write topic model: " + path);
  out << doc.dump() << "\n";
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path);
}

TopicModel load_topic_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kMissingInput, "missing topic model: " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, path + ": " + e.what());
  }
  TopicModel model;
  try {
    model.topic_count = doc.at("topic_count").get<int>();
    model.vocab_size = doc.at("vocab_size").get<int>();
    model.doc_topic_prior = doc.at("doc_topic_prior").get<double>();
    model.topic_word_prior = doc.at("topic_word_prior").get<double>();
    model.sweeps = doc.at("sweeps").get<int>();
    model.rng_seed = doc.at("rng_seed").get<uint64_t>();
    model.infer_burnin = doc.at("infer_burnin").get<int>();
    model.infer_samples = doc.at("infer_samples").get<int>();
    model.topic_word_counts = Matrix(model.topic_count, model.vocab_size);
    model.topic_word_counts.data() = doc.at("counts").get<Vector>();
    if (static_cast<int>(model.topic_word_counts.data().size()) !=
        model.topic_count * model.vocab_size) {
      throw Error(ErrorCode::kParse, "count matrix size mismatch in " + path);
    }
    model.topic_totals = doc.at("topic_totals").get<Vector>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, path + ": " + e.what());
  }
  return model;
}

Vector smooth_simplex(const Vector& v, double eps) {
  Vector out(v.size());
  double total = 0.0;
  for (size_t i = 0; i < v.size(); ++i) {
    out[i] = v[i] + eps;
    total += out[i];
  }
  for (auto& x : out) x /= total;
  return out;
}

double sym_kl(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kInvalidArgument, "context dimension mismatch");
  }
  const Vector sa = smooth_simplex(a);
  const Vector sb = smooth_simplex(b);
  double total = 0.0;
  for (size_t i = 0; i < sa.size(); ++i) {
    total += (sa[i] - sb[i]) * std::log(sa[i] / sb[i]);
  }
  return total;
}

}  // namespace tagsem
