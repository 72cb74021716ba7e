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

#ifndef TAGSEM_TAGFEAT_HPP
#define TAGSEM_TAGFEAT_HPP

#include <string>
#include <vector>

#include "corpus.hpp"
#include "matrix.hpp"

namespace tagsem {

/// Document frequencies over the training split. idf(tag) =
/// ln(doc_count / (1 + df(tag))), natural log; df == doc_count gives a
/// (slightly) negative idf, kept as-is.
struct CorpusStats {
  int doc_count = 0;
  std::vector<int> df;   // per vocabulary index
  Vector idf;            // per vocabulary index
};

CorpusStats compute_corpus_stats(const Corpus& training);

/// tfidf(tag, doc) with binary tf: idf(tag) when the tag appears, else 0.
/// Throws for tags outside the vocabulary.
double tfidf_weight(const std::string& tag, const Document& doc, const Corpus& corpus,
                    const CorpusStats& stats);

/// Usage pattern of every tag across the training documents:
/// row tag, column document, entry tfidf(tag, doc).
struct UsageMatrix {
  Matrix tfidf;   // |vocab| x |train docs|
  CorpusStats stats;
};

UsageMatrix build_usage_matrix(const Corpus& training);

/// Global-relatedness features: T(t1, t2) = <u(t1), u(t2)>, i.e. the
/// co-occurrence count scaled by both idf values. Row t is the tag feature
/// vector t(tag).
struct TagFeatureTable {
  Matrix table;   // |vocab| x |vocab|, symmetric
  CorpusStats stats;
};

/// Builds the feature table directly from the training documents; equals
/// UsageMatrix * UsageMatrix^T entry for entry.
TagFeatureTable build_tag_features(const Corpus& training);

/// Row of the table for a tag name; throws for unknown (e.g. reserved) tags.
Vector tag_feature_vector(const std::string& tag, const TagFeatureTable& features,
                          const Corpus& corpus);

}  // namespace tagsem

#endif  // TAGSEM_TAGFEAT_HPP
