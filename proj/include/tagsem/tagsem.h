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

/* C API of the tagsem shared library.
 *
 * tagsem learns contextualized tag embeddings from collections of
 * co-occurring tags (tfidf tag features + LDA context features feeding a
 * tanh prediction network, fine-tuned with a Siamese distance objective) and
 * evaluates them with semantic priming and tag completion protocols.
 *
 * All functions returning tagsem_status report TAGSEM_OK on success; on
 * failure, tagsem_last_error() returns a thread-local description of the most
 * recent error. Objects returned through out-parameters are owned by the
 * caller and released with the matching _free function.
 */

#ifndef TAGSEM_TAGSEM_H
#define TAGSEM_TAGSEM_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define TAGSEM_API __declspec(dllexport)
#else
#define TAGSEM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tagsem_status {
  TAGSEM_OK = 0,
  TAGSEM_ERROR_IO = 1,
  TAGSEM_ERROR_PARSE = 2,
  TAGSEM_ERROR_VALIDATION = 3,
  TAGSEM_ERROR_CONFIG = 4,
  TAGSEM_ERROR_MISSING_INPUT = 5,
  TAGSEM_ERROR_NUMERIC = 6,
  TAGSEM_ERROR_INVALID_ARGUMENT = 7,
  TAGSEM_ERROR_INTERNAL = 8
} tagsem_status;

typedef struct tagsem_corpus tagsem_corpus;
typedef struct tagsem_split_plan tagsem_split_plan;
typedef struct tagsem_model tagsem_model;

TAGSEM_API const char* tagsem_status_name(tagsem_status status);

/* Thread-local message of the most recent failure; empty string when none. */
TAGSEM_API const char* tagsem_last_error(void);

/* ---- corpus ---------------------------------------------------------- */

/* Loads a JSONL corpus: one {"id": ..., "tags": [...]} object per line. */
TAGSEM_API tagsem_status tagsem_corpus_load(const char* path, tagsem_corpus** out);
TAGSEM_API void tagsem_corpus_free(tagsem_corpus* corpus);
TAGSEM_API size_t tagsem_corpus_document_count(const tagsem_corpus* corpus);
TAGSEM_API size_t tagsem_corpus_vocabulary_size(const tagsem_corpus* corpus);
/* Vocabulary entry by index; NULL when out of range. The pointer stays valid
 * for the corpus lifetime. */
TAGSEM_API const char* tagsem_corpus_tag(const tagsem_corpus* corpus, size_t index);

/* ---- split planning --------------------------------------------------- */

/* Reserves oov_tag_count tags (with the documents containing them) for
 * out-of-vocabulary evaluation and plans fold_count cross-validation folds
 * over the remaining documents. */
TAGSEM_API tagsem_status tagsem_split_plan_create(const tagsem_corpus* corpus, int fold_count,
                                                  double validation_fraction, int oov_tag_count,
                                                  uint64_t seed, tagsem_split_plan** out);
TAGSEM_API tagsem_status tagsem_split_plan_save(const tagsem_split_plan* plan, const char* path);
TAGSEM_API tagsem_status tagsem_split_plan_load(const char* path, tagsem_split_plan** out);
TAGSEM_API void tagsem_split_plan_free(tagsem_split_plan* plan);
TAGSEM_API size_t tagsem_split_plan_fold_count(const tagsem_split_plan* plan);
TAGSEM_API size_t tagsem_split_plan_reserved_tag_count(const tagsem_split_plan* plan);
TAGSEM_API size_t tagsem_split_plan_oov_document_count(const tagsem_split_plan* plan);

/* ---- trained models --------------------------------------------------- */

TAGSEM_API tagsem_status tagsem_model_load(const char* path, tagsem_model** out);
TAGSEM_API void tagsem_model_free(tagsem_model* model);
TAGSEM_API size_t tagsem_model_vocabulary_size(const tagsem_model* model);
TAGSEM_API size_t tagsem_model_embedding_dim(const tagsem_model* model);
/* Training stage of the checkpoint: "pretrained", "ce" or "siamese-ce". */
TAGSEM_API const char* tagsem_model_stage(const tagsem_model* model);

/* Contextual embedding of an in-vocabulary tag within a document given as an
 * array of tag strings. out_ce must hold tagsem_model_embedding_dim values. */
TAGSEM_API tagsem_status tagsem_model_embed(const tagsem_model* model, const char* tag,
                                            const char* const* doc_tags, size_t doc_tag_count,
                                            double* out_ce);

/* Centroid embedding for an out-of-vocabulary tag from its in-vocabulary
 * companions in the document. */
TAGSEM_API tagsem_status tagsem_model_embed_oov(const tagsem_model* model, const char* oov_tag,
                                                const char* const* doc_tags,
                                                size_t doc_tag_count, double* out_ce);

/* Prediction scores over the vocabulary for a (tag, document) query.
 * out_scores must hold tagsem_model_vocabulary_size values, ordered like the
 * model vocabulary. */
TAGSEM_API tagsem_status tagsem_model_predict(const tagsem_model* model, const char* tag,
                                              const char* const* doc_tags, size_t doc_tag_count,
                                              double* out_scores);

/* ---- pipeline --------------------------------------------------------- */

/* Default configuration as a JSON object; callers overlay their overrides.
 * Free the returned string with tagsem_string_free. */
TAGSEM_API char* tagsem_default_config(void);
TAGSEM_API void tagsem_string_free(char* text);

/* Runs one pipeline subcommand (prepare, train-topics, pretrain,
 * train-predict, train-siamese, embed, prime, complete, report) with a
 * resolved flat JSON configuration. Artifacts are written into the
 * configured output directory. */
TAGSEM_API tagsem_status tagsem_run(const char* subcommand, const char* config_json);

#ifdef __cplusplus
}
#endif

#endif /* TAGSEM_TAGSEM_H */
