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

#ifndef TAGSEM_TOPICS_HPP
#define TAGSEM_TOPICS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "corpus.hpp"
#include "matrix.hpp"

namespace tagsem {

struct LdaConfig {
  int topic_count = 19;
  double doc_topic_prior = 0.0;   // B0; <= 0 selects the 50/topic_count default
  double topic_word_prior = 0.01; // B
  int sweeps = 1000;
  int infer_burnin = 50;          // fold-in burn-in sweeps for held-out documents
  int infer_samples = 50;         // averaged sweeps after burn-in
  bool estimate_priors = false;   // Minka fixed-point updates during training

  double resolved_doc_topic_prior() const {
    return doc_topic_prior > 0.0 ? doc_topic_prior : 50.0 / topic_count;
  }
};

/// Trained LDA state: topic-word assignment counts plus priors. Documents are
/// sets of tags, so every tag occurs at most once per document.
struct TopicModel {
  int topic_count = 0;
  int vocab_size = 0;
  double doc_topic_prior = 0.0;   // B0, symmetric
  double topic_word_prior = 0.0;  // B, symmetric
  Matrix topic_word_counts;       // topic_count x vocab_size
  Vector topic_totals;            // per-topic token totals
  int sweeps = 0;
  uint64_t rng_seed = 0;
  int infer_burnin = 50;
  int infer_samples = 50;

  /// Smoothed p(tag | topic).
  double word_prob(int topic, int word) const {
    return (topic_word_counts(topic, word) + topic_word_prior) /
           (topic_totals[static_cast<size_t>(topic)] + vocab_size * topic_word_prior);
  }
};

/// Collapsed Gibbs sampling over the training documents, deterministic for a
/// fixed seed (documents are visited in corpus order).
TopicModel train_lda(const Corpus& training, const LdaConfig& config, uint64_t seed);

/// Fold-in Gibbs for a held-out tag set against frozen topic-word counts:
/// burn-in sweeps, then topic-assignment proportions averaged over sample
/// sweeps, smoothed by the document-topic prior and normalized.
Vector infer_context(const TopicModel& model, const std::vector<int>& tag_indices,
                     uint64_t seed);

/// By-name wrapper: drops tags unknown to the model, errors when none remain.
Vector infer_context(const TopicModel& model, const Corpus& vocab_source,
                     const std::vector<std::string>& tags, uint64_t seed);

void save_topic_model(const TopicModel& model, const std::string& path);
TopicModel load_topic_model(const std::string& path);

/// Adds eps to every component and renormalizes; keeps log arguments finite.
Vector smooth_simplex(const Vector& v, double eps = 1e-8);

/// Symmetric KL divergence sum_c (a_c - b_c) * ln(a_c / b_c), computed on
/// eps-smoothed copies of both inputs.
double sym_kl(const Vector& a, const Vector& b);

}  // namespace tagsem

#endif  // TAGSEM_TOPICS_HPP
