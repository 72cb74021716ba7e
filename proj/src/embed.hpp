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

#ifndef TAGSEM_EMBED_HPP
#define TAGSEM_EMBED_HPP

#include <string>
#include <vector>

#include "model.hpp"

namespace tagsem {

struct EmbeddingRecord {
  enum class Provenance { kInVocabulary, kOovCentroid };

  std::string tag;
  std::string doc_id;
  Vector ce;
  Provenance provenance = Provenance::kInVocabulary;
};

/// CE of an in-vocabulary tag within a document's context. Throws for tags
/// outside the vocabulary (those go through embed_oov).
EmbeddingRecord embed_in_context(const EmbeddingModel& model, const std::string& tag,
                                 const std::vector<std::string>& doc_tags,
                                 const std::string& doc_id);

/// CE of an out-of-vocabulary tag: the centroid of its in-vocabulary
/// companions' CEs, each computed against the companions-only context.
EmbeddingRecord embed_oov(const EmbeddingModel& model, const std::string& oov_tag,
                          const std::vector<std::string>& doc_tags,
                          const std::string& doc_id);

enum class EmbeddingFormat { kJsonl, kCsv };

/// One record per line; CSV carries a fixed header and 17 significant digits
/// so reloading reproduces the coordinates exactly.
void export_embeddings(const std::vector<EmbeddingRecord>& records, const std::string& path,
                       EmbeddingFormat format);

std::vector<EmbeddingRecord> load_embeddings(const std::string& path, EmbeddingFormat format);

}  // namespace tagsem

#endif  // TAGSEM_EMBED_HPP
