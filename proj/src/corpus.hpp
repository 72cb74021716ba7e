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

#ifndef TAGSEM_CORPUS_HPP
#define TAGSEM_CORPUS_HPP

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "matrix.hpp"

namespace tagsem {

/// One annotated track: an id plus the set of co-occurring tags. Tags are
/// stored sorted and deduplicated.
struct Document {
  std::string id;
  std::vector<std::string> tags;
};

/// Document collection plus its fixed, lexicographically ordered vocabulary.
/// The vocabulary ordering defines the bag-of-words index space everywhere.
struct Corpus {
  std::vector<Document> documents;
  std::vector<std::string> vocabulary;
  std::unordered_map<std::string, int> vocab_index;

  /// Index of `tag` in the vocabulary, or -1.
  int tag_index(const std::string& tag) const {
    const auto it = vocab_index.find(tag);
    return it == vocab_index.end() ? -1 : it->second;
  }

  /// Sorted vocabulary indices of the document's in-vocabulary tags.
  std::vector<int> tag_indices(const Document& doc) const;
};

/// Normalizes documents (sort + dedupe tags), validates them, and builds the
/// vocabulary. Shared by the loader and the synthetic generators.
Corpus make_corpus(std::vector<Document> documents);

/// Loads a JSONL corpus: one {"id": ..., "tags": [...]} object per line.
Corpus load_corpus(const std::string& path);

/// Writes a corpus back out as JSONL, one document per line in corpus order.
void save_corpus(const Corpus& corpus, const std::string& path);

/// Result of reserving tags for out-of-vocabulary evaluation: the reserved
/// tags plus every document that contains at least one of them.
struct OovReservation {
  std::vector<std::string> reserved_tags;      // sorted
  std::vector<std::string> oov_document_ids;   // corpus order
};

OovReservation reserve_oov(const Corpus& corpus, int tag_count, uint64_t seed);

struct Fold {
  std::vector<std::string> train;
  std::vector<std::string> validation;
  std::vector<std::string> test;
};

struct SplitPlan {
  int fold_count = 3;
  std::vector<Fold> folds;
  std::vector<std::string> reserved_oov_tags;
  std::vector<std::string> oov_document_ids;
  uint64_t rng_seed = 0;
};

/// Shuffles the non-OOV documents by seed and partitions them into
/// `fold_count` near-equal parts; part i becomes fold i's held-out set, with
/// the first ceil(validation_fraction * |part|) documents as validation and
/// the rest as test.
SplitPlan make_folds(const Corpus& corpus, const OovReservation& reservation,
                     int fold_count, double validation_fraction, uint64_t seed);

void save_split_plan(const SplitPlan& plan, const std::string& path);
SplitPlan load_split_plan(const std::string& path);

/// Corpus with OOV documents removed and reserved tags dropped from the
/// vocabulary. This defines the model vocabulary used by all later stages.
Corpus apply_reservation(const Corpus& corpus, const OovReservation& reservation);

/// Documents with the given ids, in the given order, keeping the source
/// vocabulary (fold subsets must not shrink the index space).
Corpus subset_documents(const Corpus& corpus, const std::vector<std::string>& ids);

/// Continuous track-tag relatedness ground truth.
struct RelevanceTable {
  std::unordered_map<std::string, std::unordered_map<std::string, double>> rows;

  bool has(const std::string& doc_id) const { return rows.count(doc_id) > 0; }
  const std::unordered_map<std::string, double>& row(const std::string& doc_id) const;
};

/// Loads relevance JSONL ({"id": ..., "relevance": {tag: value}}), validating
/// values >= 0 and tags against the corpus vocabulary.
RelevanceTable load_relevance(const std::string& path, const Corpus& corpus);

void save_relevance(const RelevanceTable& table, const std::string& path);

/// Synthetic corpus with planted structure, used as a recovery oracle.
struct SyntheticCorpus {
  Corpus corpus;
  std::vector<std::string> tag_names; // column order of topic_word
  Matrix topic_word;                  // planted p(tag | topic), topic_count x vocab_size
  std::vector<Vector> doc_mixtures;   // planted mixture per document
  RelevanceTable relevance;           // planted p(tag | document mixture)
};

/// Documents are drawn by sampling a topic mixture from a symmetric Dirichlet
/// and then tags from planted per-topic categoricals with disjoint supports
/// (the vocabulary is split into near-equal blocks, one per topic).
SyntheticCorpus generate_synthetic(int topic_count, int vocab_size, int doc_count,
                                   int min_doc_length, int max_doc_length, uint64_t seed);

/// Two-community corpus: two disjoint blocks of `community_tag_count` tags
/// plus `shared_tag_count` tags usable by both. Each document samples its
/// tags from its community's planted (Zipf-like) distribution.
struct CommunityCorpus {
  Corpus corpus;
  std::vector<std::string> tag_names; // column order of community_tag_prob
  std::vector<int> doc_community;     // 0 or 1 per document
  Matrix community_tag_prob;          // 2 x vocab_size planted probabilities
  RelevanceTable relevance;
};

CommunityCorpus generate_communities(int community_tag_count, int shared_tag_count,
                                     int doc_count, int min_doc_length, int max_doc_length,
                                     uint64_t seed);

}  // namespace tagsem

#endif  // TAGSEM_CORPUS_HPP
