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

#ifndef TAGSEM_MODEL_HPP
#define TAGSEM_MODEL_HPP

#include <string>
#include <unordered_map>
#include <vector>

#include "network.hpp"
#include "tagfeat.hpp"
#include "topics.hpp"

namespace tagsem {

/// The trained embedding model: the tanh network together with the tag
/// feature table and topic model it was built on. The penultimate layer's
/// activation for an input (t(tag), l(doc)) is the contextual embedding.
struct EmbeddingModel {
  std::string stage = "pretrained";   // pretrained | ce | siamese-ce
  std::vector<std::string> vocabulary;
  std::unordered_map<std::string, int> vocab_index;
  std::vector<int> layer_plan;        // hidden layer widths
  Network net;
  TagFeatureTable features;
  bool standardize_features = false;
  Vector feature_mean;                // per feature column, when standardizing
  Vector feature_std;
  TopicModel topics;
  HyperParams hyper;
  uint64_t rng_seed = 0;
  std::vector<EpochLog> validation_history;

  int vocab_size() const { return static_cast<int>(vocabulary.size()); }
  int topic_count() const { return topics.topic_count; }
  int embedding_dim() const { return net.embedding_size(); }

  int tag_index(const std::string& tag) const {
    const auto it = vocab_index.find(tag);
    return it == vocab_index.end() ? -1 : it->second;
  }

  void rebuild_vocab_index();
  void compute_feature_standardization();

  /// Deterministic context for a tag set: the inference seed is derived from
  /// the model seed and the sorted in-vocabulary indices, so equal tag sets
  /// always produce equal contexts.
  Vector context_for_indices(const std::vector<int>& indices) const;
  Vector context_for_tags(const std::vector<std::string>& tags) const;

  /// In-vocabulary indices of a tag set, sorted and deduplicated.
  std::vector<int> known_indices(const std::vector<std::string>& tags) const;

  /// Network input (t(tag), l(context)), standardized when configured.
  Vector build_input(int tag_idx, const Vector& context) const;

  Vector ce(int tag_idx, const Vector& context) const;        // penultimate activation
  Vector predict(int tag_idx, const Vector& context) const;   // output activation
  Vector predict_from_ce(const Vector& ce_vector) const;      // final layer only
};

void save_checkpoint(const EmbeddingModel& model, const std::string& path);
EmbeddingModel load_checkpoint(const std::string& path);

}  // namespace tagsem

#endif  // TAGSEM_MODEL_HPP
