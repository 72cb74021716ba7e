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

#include "tagfeat.hpp"

#include <cmath>

#include "error.hpp"

namespace tagsem {

CorpusStats compute_corpus_stats(const Corpus& training) {
  CorpusStats stats;
  stats.doc_count = static_cast<int>(training.documents.size());
  stats.df.assign(training.vocabulary.size(), 0);
  for (const auto& doc : training.documents) {
    for (const int idx : training.tag_indices(doc)) {
      ++stats.df[static_cast<size_t>(idx)];
    }
  }
  stats.idf.resize(training.vocabulary.size());
  for (size_t i = 0; i < stats.idf.size(); ++i) {
    stats.idf[i] = std::log(static_cast<double>(stats.doc_count) /
                            static_cast<double>(1 + stats.df[i]));
  }
  return stats;
}

double tfidf_weight(const std::string& tag, const Document& doc, const Corpus& corpus,
                    const CorpusStats& stats) {
  const int idx = corpus.tag_index(tag);
  if (idx < 0) throw Error(ErrorCode::kValidation, "unknown tag: " + tag);
  const bool present = std::binary_search(doc.tags.begin(), doc.tags.end(), tag);
  return present ? stats.idf[static_cast<size_t>(idx)] : 0.0;
}

UsageMatrix build_usage_matrix(const Corpus& training) {
  UsageMatrix usage;
  usage.stats = compute_corpus_stats(training);
  usage.tfidf = Matrix(static_cast<int>(training.vocabulary.size()),
                       static_cast<int>(training.documents.size()), 0.0);
  for (size_t d = 0; d < training.documents.size(); ++d) {
    for (const int idx : training.tag_indices(training.documents[d])) {
      usage.tfidf(idx, static_cast<int>(d)) = usage.stats.idf[static_cast<size_t>(idx)];
    }
  }
  return usage;
}

TagFeatureTable build_tag_features(const Corpus& training) {
  TagFeatureTable features;
  features.stats = compute_corpus_stats(training);
  const int vocab_size = static_cast<int>(training.vocabulary.size());
  features.table = Matrix(vocab_size, vocab_size, 0.0);

  // T = U U^T accumulated document by document: a document containing both
  // tags contributes idf(t1) * idf(t2). Same floating point order as the
  // explicit dot product over documents.
  for (const auto& doc : training.documents) {
    const std::vector<int> idx = training.tag_indices(doc);
    for (const int i : idx) {
      const double wi = features.stats.idf[static_cast<size_t>(i)];
      for (const int j : idx) {
        features.table(i, j) += wi * features.stats.idf[static_cast<size_t>(j)];
      }
    }
  }
  return features;
}

Vector tag_feature_vector(const std::string& tag, const TagFeatureTable& features,
                          const Corpus& corpus) {
  const int idx = corpus.tag_index(tag);
  if (idx < 0) {
    throw Error(ErrorCode::kValidation,
                "tag has no features (not in the training vocabulary): " + tag);
  }
  const double* row = features.table.row(idx);
  return Vector(row, row + features.table.cols());
}

}  // namespace tagsem
