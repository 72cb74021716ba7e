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

#include "tagsem/tagsem.h"

#include <cstring>
#include <string>

#include <json.hpp>

#include "corpus.hpp"
#include "embed.hpp"
#include "error.hpp"
#include "model.hpp"
#include "pipeline.hpp"

using namespace tagsem;

struct tagsem_corpus {
  Corpus value;
};

struct tagsem_split_plan {
  SplitPlan value;
};

struct tagsem_model {
  EmbeddingModel value;
};

namespace {

thread_local std::string g_last_error;

tagsem_status status_of(const Error& error) {
  switch (error.code()) {
    case ErrorCode::kIo: return TAGSEM_ERROR_IO;
    case ErrorCode::kParse: return TAGSEM_ERROR_PARSE;
    case ErrorCode::kValidation: return TAGSEM_ERROR_VALIDATION;
    case ErrorCode::kConfig: return TAGSEM_ERROR_CONFIG;
    case ErrorCode::kMissingInput: return TAGSEM_ERROR_MISSING_INPUT;
    case ErrorCode::kNumeric: return TAGSEM_ERROR_NUMERIC;
    case ErrorCode::kInvalidArgument: return TAGSEM_ERROR_INVALID_ARGUMENT;
  }
  return TAGSEM_ERROR_INTERNAL;
}

/// Runs the body, translating exceptions into status codes + last-error text.
template <typename Fn>
tagsem_status guarded(Fn&& body) {
  try {
    body();
    g_last_error.clear();
    return TAGSEM_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return status_of(e);
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return TAGSEM_ERROR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return TAGSEM_ERROR_INTERNAL;
  }
}

std::vector<std::string> tag_list(const char* const* doc_tags, size_t doc_tag_count) {
  std::vector<std::string> tags;
  tags.reserve(doc_tag_count);
  for (size_t i = 0; i < doc_tag_count; ++i) {
    if (doc_tags[i]) tags.emplace_back(doc_tags[i]);
  }
  return tags;
}

}  // namespace

extern "C" {

const char* tagsem_status_name(tagsem_status status) {
  switch (status) {
    case TAGSEM_OK: return "ok";
    case TAGSEM_ERROR_IO: return "io";
    case TAGSEM_ERROR_PARSE: return "parse";
    case TAGSEM_ERROR_VALIDATION: return "validation";
    case TAGSEM_ERROR_CONFIG: return "config";
    case TAGSEM_ERROR_MISSING_INPUT: return "missing-input";
    case TAGSEM_ERROR_NUMERIC: return "numeric";
    case TAGSEM_ERROR_INVALID_ARGUMENT: return "invalid-argument";
    case TAGSEM_ERROR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* tagsem_last_error(void) { return g_last_error.c_str(); }

tagsem_status tagsem_corpus_load(const char* path, tagsem_corpus** out) {
  if (!path || !out) {
    g_last_error = "null argument";
    return TAGSEM_ERROR_INVALID_ARGUMENT;
  }
  return guarded([&] { *out = new tagsem_corpus{load_corpus(path)}; });
}

void tagsem_corpus_free(tagsem_corpus* corpus) { delete corpus; }

size_t tagsem_corpus_document_count(const tagsem_corpus* corpus) {
  return corpus ? corpus->value.documents.size() : 0;
}

size_t tagsem_corpus_vocabulary_size(const tagsem_corpus* corpus) {
  return corpus ? corpus->value.vocabulary.size() : 0;
}

const char* tagsem_corpus_tag(const tagsem_corpus* corpus, size_t index) {
  if (!corpus || index >= corpus->value.vocabulary.size()) return nullptr;
  return corpus->value.vocabulary[index].c_str();
}

tagsem_status tagsem_split_plan_create(const tagsem_corpus* corpus, int fold_count,
                                       double validation_fraction, int oov_tag_count,
                                       uint64_t seed, tagsem_split_plan** out) {
  if (!corpus || !out) {
    g_last_error = "null argument";
    return TAGSEM_ERROR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    const OovReservation reservation = reserve_oov(corpus->value, oov_tag_count, seed);
    *out = new tagsem_split_plan{
        make_folds(corpus->value, reservation, fold_count, validation_fraction, seed)};
  });
}

tagsem_status tagsem_split_plan_save(const tagsem_split_plan* plan, const char* path) {
  if (!plan || !path) {
    g_last_error = "null argument";
    return TAGSEM_ERROR_INVALID_ARGUMENT;
  }
  return guarded([&] { save_split_plan(plan->value, path); });
}

tagsem_status tagsem_split_plan_load(const char* path, tagsem_split_plan** out) {
  if (!path || !out) {
    g_last_error = "null argument";
    return TAGSEM_ERROR_INVALID_ARGUMENT;
  }
  return guarded([&] { *out = new tagsem_split_plan{load_split_plan(path)}; });
}

void tagsem_split_plan_free(tagsem_split_plan* plan) { delete plan; }

size_t tagsem_split_plan_fold_count(const tagsem_split_plan* plan) {
  return plan ? plan->value.folds.size() : 0;
}

size_t tagsem_split_plan_reserved_tag_count(const tagsem_split_plan* plan) {
  return plan ? plan->value.reserved_oov_tags.size() : 0;
}

size_t tagsem_split_plan_oov_document_count(const tagsem_split_plan* plan) {
  return plan ? plan->value.oov_document_ids.size() : 0;
}

tagsem_status tagsem_model_load(const char* path, tagsem_model** out) {
  if (!path || !out) {
    g_last_error = "null argument";
    return TAGSEM_ERROR_INVALID_ARGUMENT;
  }
  return guarded([&] { *out = new tagsem_model{load_checkpoint(path)}; });
}

void tagsem_model_free(tagsem_model* model) { delete model; }

size_t tagsem_model_vocabulary_size(const tagsem_model* model) {
  return model ? model->value.vocabulary.size() : 0;
}

size_t tagsem_model_embedding_dim(const tagsem_model* model) {
  return model ? static_cast<size_t>(model->value.embedding_dim()) : 0;
}

const char* tagsem_model_stage(const tagsem_model* model) {
  return model ? model->value.stage.c_str() : nullptr;
}

tagsem_status tagsem_model_embed(const tagsem_model* model, const char* tag,
                                 const char* const* doc_tags, size_t doc_tag_count,
                                 double* out_ce) {
  if (!model || !tag || !doc_tags || !out_ce) {
    g_last_error = "null argument";
    return TAGSEM_ERROR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    const EmbeddingRecord record =
        embed_in_context(model->value, tag, tag_list(doc_tags, doc_tag_count), "");
    std::memcpy(out_ce, record.ce.data(), record.ce.size() * sizeof(double));
  });
}

tagsem_status tagsem_model_embed_oov(const tagsem_model* model, const char* oov_tag,
                                     const char* const* doc_tags, size_t doc_tag_count,
                                     double* out_ce) {
  if (!model || !oov_tag || !doc_tags || !out_ce) {
    g_last_error = "null argument";
    return TAGSEM_ERROR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    const EmbeddingRecord record =
        embed_oov(model->value, oov_tag, tag_list(doc_tags, doc_tag_count), "");
    std::memcpy(out_ce, record.ce.data(), record.ce.size() * sizeof(double));
  });
}

tagsem_status tagsem_model_predict(const tagsem_model* model, const char* tag,
                                   const char* const* doc_tags, size_t doc_tag_count,
                                   double* out_scores) {
  if (!model || !tag || !doc_tags || !out_scores) {
    g_last_error = "null argument";
    return TAGSEM_ERROR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    const EmbeddingModel& m = model->value;
    const std::vector<std::string> tags = tag_list(doc_tags, doc_tag_count);
    const Vector context = m.context_for_tags(tags);
    const int idx = m.tag_index(tag);
    Vector scores;
    if (idx >= 0) {
      scores = m.predict(idx, context);
    } else {
      const EmbeddingRecord record = embed_oov(m, tag, tags, "");
      scores = m.predict_from_ce(record.ce);
    }
    std::memcpy(out_scores, scores.data(), scores.size() * sizeof(double));
  });
}

char* tagsem_default_config(void) {
  const std::string text = RunConfig{}.to_json().dump(2);
  char* out = new char[text.size() + 1];
  std::memcpy(out, text.c_str(), text.size() + 1);
  return out;
}

void tagsem_string_free(char* text) { delete[] text; }

tagsem_status tagsem_run(const char* subcommand, const char* config_json) {
  if (!subcommand || !config_json) {
    g_last_error = "null argument";
    return TAGSEM_ERROR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(config_json);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kConfig, std::string("config is not valid JSON: ") + e.what());
    }
    run_command(subcommand, RunConfig::from_json(doc));
  });
}

}  // extern "C"
