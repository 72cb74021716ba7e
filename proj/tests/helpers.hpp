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

#ifndef TAGSEM_TESTS_HELPERS_HPP
#define TAGSEM_TESTS_HELPERS_HPP

#include "corpus.hpp"
#include "model.hpp"
#include "rng.hpp"
#include "tagfeat.hpp"
#include "topics.hpp"

namespace tagsem::testing {

/// Small random corpus over tags t0..t{vocab-1}; every tag is forced to
/// appear at least once so the vocabulary is exactly vocab wide.
inline Corpus small_corpus(int vocab, int doc_count, uint64_t seed) {
  Rng rng(seed);
  std::vector<Document> docs;
  for (int d = 0; d < doc_count; ++d) {
    Document doc;
    doc.id = "doc" + std::to_string(d);
    doc.tags.push_back("t" + std::to_string(d % vocab));
    const int extra = 1 + static_cast<int>(rng.uniform_int(3));
    for (int i = 0; i < extra; ++i) {
      doc.tags.push_back("t" + std::to_string(rng.uniform_int(static_cast<uint64_t>(vocab))));
    }
    docs.push_back(std::move(doc));
  }
  return make_corpus(std::move(docs));
}

/// Untrained but structurally complete model bundle over a small corpus.
inline EmbeddingModel make_test_model(int vocab = 6, int topic_count = 2, uint64_t seed = 1,
                                      std::vector<int> layer_plan = {5, 3}) {
  const Corpus corpus = small_corpus(vocab, vocab * 4, seed);

  EmbeddingModel model;
  model.stage = "ce";
  model.vocabulary = corpus.vocabulary;
  model.rebuild_vocab_index();
  model.layer_plan = layer_plan;
  model.rng_seed = seed;
  model.features = build_tag_features(corpus);
  model.compute_feature_standardization();

  LdaConfig lda;
  lda.topic_count = topic_count;
  lda.doc_topic_prior = 0.5;
  lda.sweeps = 30;
  model.topics = train_lda(corpus, lda, derive_seed(seed, "lda"));

  Rng rng(derive_seed(seed, "net"));
  model.net = make_network(vocab + topic_count, layer_plan, vocab, rng);
  return model;
}

}  // namespace tagsem::testing

#endif  // TAGSEM_TESTS_HELPERS_HPP
