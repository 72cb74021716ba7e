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

#include "evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "error.hpp"
#include "rng.hpp"

namespace tagsem {

using nlohmann::json;

RankedList make_ranked_list(std::string query_tag, std::string doc_id,
                            const std::vector<std::string>& candidates, const Vector& scores) {
  if (candidates.size() != scores.size()) {
    throw Error(ErrorCode::kInvalidArgument, "candidate/score size mismatch");
  }
  std::vector<size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return candidates[a] < candidates[b];
  });

  RankedList ranked;
  ranked.query_tag = std::move(query_tag);
  ranked.doc_id = std::move(doc_id);
  ranked.tags.reserve(candidates.size());
  ranked.scores.reserve(scores.size());
  for (const size_t i : order) {
    ranked.tags.push_back(candidates[i]);
    ranked.scores.push_back(scores[i]);
  }
  return ranked;
}

// ---------------------------------------------------------------------------
// Rankers

struct ModelRanker::DocState {
  std::string doc_id;
  Vector context;
  bool ces_ready = false;
  std::vector<Vector> ces;   // per vocabulary index
};

ModelRanker::ModelRanker(const EmbeddingModel& model, RankingMode mode)
    : model_(model), mode_(mode), state_(std::make_shared<DocState>()) {}

RankedList ModelRanker::rank(const std::string& query_tag, const DocView& doc) const {
  DocState& state = *state_;
  if (state.doc_id != doc.id || state.context.empty()) {
    state.doc_id = doc.id;
    state.context = model_.context_for_tags(doc.tags);
    state.ces_ready = false;
    state.ces.clear();
  }

  const int query_idx = model_.tag_index(query_tag);
  const bool need_ces = mode_ == RankingMode::kDistance || query_idx < 0;
  if (need_ces && !state.ces_ready) {
    state.ces.resize(model_.vocabulary.size());
    for (int j = 0; j < model_.vocab_size(); ++j) {
      state.ces[static_cast<size_t>(j)] = model_.ce(j, state.context);
    }
    state.ces_ready = true;
  }

  // Query embedding or prediction; OOV queries use the companion centroid.
  Vector query_ce;
  if (query_idx < 0) {
    const std::vector<int> companions = model_.known_indices(doc.tags);
    if (companions.empty()) {
      throw Error(ErrorCode::kValidation,
                  "no in-vocabulary context tags for query '" + query_tag + "'");
    }
    query_ce.assign(static_cast<size_t>(model_.embedding_dim()), 0.0);
    for (const int idx : companions) {
      const Vector& ce = state.ces[static_cast<size_t>(idx)];
      for (size_t j = 0; j < query_ce.size(); ++j) query_ce[j] += ce[j];
    }
    for (auto& v : query_ce) v /= static_cast<double>(companions.size());
  }

  Vector scores;
  if (mode_ == RankingMode::kPrediction) {
    scores = query_idx >= 0 ? model_.predict(query_idx, state.context)
                            : model_.predict_from_ce(query_ce);
  } else {
    const Vector& q = query_idx >= 0 ? state.ces[static_cast<size_t>(query_idx)] : query_ce;
    scores.resize(model_.vocabulary.size());
    for (size_t j = 0; j < model_.vocabulary.size(); ++j) {
      const Vector& c = state.ces[j];
      double dist2 = 0.0;
      for (size_t d = 0; d < q.size(); ++d) {
        const double diff = q[d] - c[d];
        dist2 += diff * diff;
      }
      scores[j] = -std::sqrt(dist2);
    }
  }
  return make_ranked_list(query_tag, doc.id, model_.vocabulary, scores);
}

RandomRanker::RandomRanker(std::vector<std::string> vocabulary, uint64_t seed)
    : vocabulary_(std::move(vocabulary)), seed_(seed) {
  if (vocabulary_.empty()) throw Error(ErrorCode::kInvalidArgument, "empty vocabulary");
}

RankedList RandomRanker::rank(const std::string& query_tag, const DocView& doc) const {
  Rng rng(derive_seed(seed_, doc.id + "\x1f" + query_tag));
  Vector scores(vocabulary_.size());
  for (auto& v : scores) v = rng.uniform01();
  return make_ranked_list(query_tag, doc.id, vocabulary_, scores);
}

LdaRanker::LdaRanker(const TopicModel& topics, std::vector<std::string> vocabulary,
                     uint64_t seed)
    : topics_(topics), vocabulary_(std::move(vocabulary)), seed_(seed) {
  if (vocabulary_.empty()) throw Error(ErrorCode::kInvalidArgument, "empty vocabulary");
  for (size_t i = 0; i < vocabulary_.size(); ++i) {
    vocab_index_.emplace(vocabulary_[i], static_cast<int>(i));
  }
}

RankedList LdaRanker::rank(const std::string& query_tag, const DocView& doc) const {
  std::vector<int> indices;
  for (const auto& tag : doc.tags) {
    const auto it = vocab_index_.find(tag);
    if (it != vocab_index_.end()) indices.push_back(it->second);
  }
  std::sort(indices.begin(), indices.end());
  indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
  if (indices.empty()) {
    throw Error(ErrorCode::kValidation, "no in-vocabulary context tags in " + doc.id);
  }
  std::string label = "lda-context:";
  for (const int idx : indices) {
    label += std::to_string(idx);
    label += ',';
  }
  const Vector context = infer_context(topics_, indices, derive_seed(seed_, label));

  Vector scores(vocabulary_.size(), 0.0);
  for (size_t j = 0; j < vocabulary_.size(); ++j) {
    double score = 0.0;
    for (int k = 0; k < topics_.topic_count; ++k) {
      score += context[static_cast<size_t>(k)] * topics_.word_prob(k, static_cast<int>(j));
    }
    scores[j] = score;
  }
  return make_ranked_list(query_tag, doc.id, vocabulary_, scores);
}

// ---------------------------------------------------------------------------
// Metrics

double precision_at_k(const RankedList& ranked, const std::unordered_set<std::string>& truth,
                      int k) {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  if (k > static_cast<int>(ranked.tags.size())) {
    throw Error(ErrorCode::kInvalidArgument,
                "k exceeds candidate count: " + std::to_string(k));
  }
  int hits = 0;
  for (int i = 0; i < k; ++i) {
    if (truth.count(ranked.tags[static_cast<size_t>(i)])) ++hits;
  }
  return static_cast<double>(hits) / k;
}

double map_score(const RankedList& ranked, const std::unordered_set<std::string>& truth) {
  if (truth.empty()) throw Error(ErrorCode::kValidation, "empty ground truth");
  const int depth = static_cast<int>(truth.size());
  if (depth > static_cast<int>(ranked.tags.size())) {
    throw Error(ErrorCode::kInvalidArgument, "ground truth larger than candidate list");
  }
  int hits = 0;
  double total = 0.0;
  for (int i = 0; i < depth; ++i) {
    if (truth.count(ranked.tags[static_cast<size_t>(i)])) ++hits;
    total += static_cast<double>(hits) / (i + 1);
  }
  return total / depth;
}

PrCurve eleven_point_auc(const RankedList& ranked,
                         const std::unordered_set<std::string>& truth) {
  if (truth.empty()) throw Error(ErrorCode::kValidation, "empty ground truth");
  const size_t n = ranked.tags.size();
  Vector recall(n);
  Vector precision(n);
  int hits = 0;
  for (size_t i = 0; i < n; ++i) {
    if (truth.count(ranked.tags[i])) ++hits;
    recall[i] = static_cast<double>(hits) / static_cast<double>(truth.size());
    precision[i] = static_cast<double>(hits) / static_cast<double>(i + 1);
  }

  PrCurve curve;
  for (int level = 0; level <= 10; ++level) {
    const double target = level / 10.0;
    double best = 0.0;
    for (size_t i = 0; i < n; ++i) {
      if (recall[i] >= target - 1e-12 && precision[i] > best) best = precision[i];
    }
    curve.precision[static_cast<size_t>(level)] = best;
  }
  for (int level = 0; level < 10; ++level) {
    curve.auc += 0.05 * (curve.precision[static_cast<size_t>(level)] +
                         curve.precision[static_cast<size_t>(level + 1)]);
  }
  return curve;
}

namespace {

double dcg_at_k(const Vector& gains, int k) {
  double total = 0.0;
  const int depth = std::min<int>(k, static_cast<int>(gains.size()));
  for (int i = 0; i < depth; ++i) {
    total += i == 0 ? gains[static_cast<size_t>(i)]
                    : gains[static_cast<size_t>(i)] / std::log2(static_cast<double>(i + 1));
  }
  return total;
}

}  // namespace

double ndcg(const RankedList& ranked, const std::unordered_map<std::string, double>& relevance,
            int k) {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  Vector gains(ranked.tags.size(), 0.0);
  for (size_t i = 0; i < ranked.tags.size(); ++i) {
    const auto it = relevance.find(ranked.tags[i]);
    if (it != relevance.end()) {
      if (it->second < 0.0) {
        throw Error(ErrorCode::kValidation, "negative relevance for tag " + it->first);
      }
      gains[i] = it->second;
    }
  }
  Vector ideal = gains;
  std::sort(ideal.begin(), ideal.end(), std::greater<double>());
  const double ideal_dcg = dcg_at_k(ideal, k);
  if (ideal_dcg <= 0.0) throw Error(ErrorCode::kValidation, "ideal DCG is zero");
  return dcg_at_k(gains, k) / ideal_dcg;
}

NdcgCurve ndcg_curve(const RankedList& ranked,
                     const std::unordered_map<std::string, double>& relevance, int max_k) {
  NdcgCurve curve;
  curve.at_k.resize(static_cast<size_t>(max_k));
  double total = 0.0;
  for (int k = 1; k <= max_k; ++k) {
    const double value = ndcg(ranked, relevance, k);
    curve.at_k[static_cast<size_t>(k - 1)] = value;
    total += value;
  }
  curve.average = total / max_k;
  return curve;
}

EffectSize effect_size(const Vector& sample_a, const Vector& sample_b) {
  const size_t na = sample_a.size();
  const size_t nb = sample_b.size();
  if (na < 2 || nb < 2) {
    throw Error(ErrorCode::kInvalidArgument, "effect size needs >= 2 values per sample");
  }
  const double mean_a = std::accumulate(sample_a.begin(), sample_a.end(), 0.0) / na;
  const double mean_b = std::accumulate(sample_b.begin(), sample_b.end(), 0.0) / nb;
  double var_a = 0.0;
  for (const double v : sample_a) var_a += (v - mean_a) * (v - mean_a);
  var_a /= static_cast<double>(na - 1);
  double var_b = 0.0;
  for (const double v : sample_b) var_b += (v - mean_b) * (v - mean_b);
  var_b /= static_cast<double>(nb - 1);

  const double pooled = std::sqrt(((na - 1) * var_a + (nb - 1) * var_b) /
                                  static_cast<double>(na + nb - 2));
  if (!(pooled > 0.0)) throw Error(ErrorCode::kValidation, "degenerate samples");

  EffectSize result;
  result.cohens_d = (mean_a - mean_b) / pooled;
  result.t_statistic = (mean_a - mean_b) /
                       (pooled * std::sqrt(1.0 / na + 1.0 / nb));
  return result;
}

// ---------------------------------------------------------------------------
// Protocol drivers

PrimingFold run_priming_fold(const Ranker& ranker, const std::vector<DocView>& documents,
                             const PrimingOptions& options) {
  if (documents.empty()) throw Error(ErrorCode::kValidation, "no evaluation documents");
  if (options.oov_queries && options.reserved_tags.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "oov priming requires reserved tags");
  }
  const std::unordered_set<std::string> reserved(options.reserved_tags.begin(),
                                                 options.reserved_tags.end());

  PrimingFold fold;
  fold.p_at_k.assign(static_cast<size_t>(options.k_max), 0.0);

  for (const auto& doc : documents) {
    // Queries and per-document ground truth.
    std::vector<std::string> queries;
    std::vector<std::string> truth_tags;
    for (const auto& tag : doc.tags) {
      const bool is_reserved = reserved.count(tag) > 0;
      if (options.oov_queries) {
        if (is_reserved) queries.push_back(tag);
        else truth_tags.push_back(tag);
      } else {
        if (!is_reserved) {
          queries.push_back(tag);
          truth_tags.push_back(tag);
        }
      }
    }
    if (queries.empty() || truth_tags.empty()) {
      ++fold.skipped_documents;
      continue;
    }
    if (options.exclude_query && static_cast<int>(truth_tags.size()) < 2) {
      ++fold.skipped_documents;
      continue;
    }

    for (const auto& query : queries) {
      RankedList ranked = ranker.rank(query, doc);
      std::unordered_set<std::string> truth;
      for (const auto& tag : truth_tags) truth.insert(tag);
      if (options.exclude_query) {
        truth.erase(query);
        // Drop the query from the candidate list as well.
        for (size_t i = 0; i < ranked.tags.size(); ++i) {
          if (ranked.tags[i] == query) {
            ranked.tags.erase(ranked.tags.begin() + static_cast<long>(i));
            ranked.scores.erase(ranked.scores.begin() + static_cast<long>(i));
            break;
          }
        }
      }
      // Tags outside the ranker's candidate set cannot be retrieved; keep the
      // truth within the candidate universe.
      std::unordered_set<std::string> candidates(ranked.tags.begin(), ranked.tags.end());
      for (auto it = truth.begin(); it != truth.end();) {
        it = candidates.count(*it) ? std::next(it) : truth.erase(it);
      }
      if (truth.empty()) continue;

      for (int k = 1; k <= options.k_max; ++k) {
        fold.p_at_k[static_cast<size_t>(k - 1)] += precision_at_k(ranked, truth, k);
      }
      fold.map += map_score(ranked, truth);
      const PrCurve curve = eleven_point_auc(ranked, truth);
      for (size_t level = 0; level < curve.precision.size(); ++level) {
        fold.precision11[level] += curve.precision[level];
      }
      fold.auc += curve.auc;
      ++fold.query_count;
    }
  }

  if (fold.query_count > 0) {
    const double inv = 1.0 / fold.query_count;
    for (auto& v : fold.p_at_k) v *= inv;
    fold.map *= inv;
    for (auto& v : fold.precision11) v *= inv;
    fold.auc *= inv;
  }
  return fold;
}

namespace {

void mean_and_se(const std::vector<double>& values, double* mean, double* se) {
  const size_t n = values.size();
  *mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
  if (n < 2) {
    *se = 0.0;
    return;
  }
  double var = 0.0;
  for (const double v : values) var += (v - *mean) * (v - *mean);
  var /= static_cast<double>(n - 1);
  *se = std::sqrt(var / static_cast<double>(n));
}

}  // namespace

PrimingReport aggregate_priming(std::vector<PrimingFold> folds) {
  if (folds.empty()) throw Error(ErrorCode::kValidation, "no folds to aggregate");
  PrimingReport report;
  report.k_max = static_cast<int>(folds.front().p_at_k.size());
  report.mean.p_at_k.assign(folds.front().p_at_k.size(), 0.0);
  report.standard_error.p_at_k.assign(folds.front().p_at_k.size(), 0.0);

  const auto collect = [&](auto getter) {
    std::vector<double> values;
    values.reserve(folds.size());
    for (const auto& fold : folds) values.push_back(getter(fold));
    double mean = 0.0;
    double se = 0.0;
    mean_and_se(values, &mean, &se);
    return std::make_pair(mean, se);
  };

  for (size_t k = 0; k < report.mean.p_at_k.size(); ++k) {
    const auto [mean, se] = collect([&](const PrimingFold& f) { return f.p_at_k[k]; });
    report.mean.p_at_k[k] = mean;
    report.standard_error.p_at_k[k] = se;
  }
  {
    const auto [mean, se] = collect([](const PrimingFold& f) { return f.map; });
    report.mean.map = mean;
    report.standard_error.map = se;
  }
  for (size_t level = 0; level < report.mean.precision11.size(); ++level) {
    const auto [mean, se] =
        collect([&](const PrimingFold& f) { return f.precision11[level]; });
    report.mean.precision11[level] = mean;
    report.standard_error.precision11[level] = se;
  }
  {
    const auto [mean, se] = collect([](const PrimingFold& f) { return f.auc; });
    report.mean.auc = mean;
    report.standard_error.auc = se;
  }
  for (const auto& fold : folds) {
    report.mean.query_count += fold.query_count;
    report.mean.skipped_documents += fold.skipped_documents;
  }
  report.folds = std::move(folds);
  return report;
}

CompletionFold run_completion_fold(const Ranker& ranker, const std::vector<DocView>& documents,
                                   const RelevanceTable& relevance, int max_k) {
  if (documents.empty()) throw Error(ErrorCode::kValidation, "no evaluation documents");
  std::vector<std::string> missing;
  for (const auto& doc : documents) {
    if (!relevance.has(doc.id)) missing.push_back(doc.id);
  }
  if (!missing.empty()) {
    std::string joined;
    for (const auto& id : missing) {
      if (!joined.empty()) joined += ", ";
      joined += id;
    }
    throw Error(ErrorCode::kValidation, "missing relevance rows for: " + joined);
  }

  CompletionFold fold;
  fold.ndcg_at_k.assign(static_cast<size_t>(max_k), 0.0);
  for (const auto& doc : documents) {
    const auto& row = relevance.row(doc.id);
    for (const auto& query : doc.tags) {
      const RankedList ranked = ranker.rank(query, doc);
      const NdcgCurve curve = ndcg_curve(ranked, row, max_k);
      for (size_t k = 0; k < curve.at_k.size(); ++k) fold.ndcg_at_k[k] += curve.at_k[k];
      fold.averaging_ndcg += curve.average;
      ++fold.query_count;
    }
  }
  if (fold.query_count > 0) {
    const double inv = 1.0 / fold.query_count;
    for (auto& v : fold.ndcg_at_k) v *= inv;
    fold.averaging_ndcg *= inv;
  }
  return fold;
}

CompletionReport aggregate_completion(std::vector<CompletionFold> folds) {
  if (folds.empty()) throw Error(ErrorCode::kValidation, "no folds to aggregate");
  CompletionReport report;
  report.max_k = static_cast<int>(folds.front().ndcg_at_k.size());
  report.mean.ndcg_at_k.assign(folds.front().ndcg_at_k.size(), 0.0);
  report.standard_error.ndcg_at_k.assign(folds.front().ndcg_at_k.size(), 0.0);

  for (size_t k = 0; k < report.mean.ndcg_at_k.size(); ++k) {
    std::vector<double> values;
    for (const auto& fold : folds) values.push_back(fold.ndcg_at_k[k]);
    mean_and_se(values, &report.mean.ndcg_at_k[k], &report.standard_error.ndcg_at_k[k]);
  }
  std::vector<double> averages;
  for (const auto& fold : folds) averages.push_back(fold.averaging_ndcg);
  mean_and_se(averages, &report.mean.averaging_ndcg, &report.standard_error.averaging_ndcg);
  for (const auto& fold : folds) report.mean.query_count += fold.query_count;
  report.folds = std::move(folds);
  return report;
}

// ---------------------------------------------------------------------------
// Report files

namespace {

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write report: " + path);
  return out;
}

json priming_fold_json(const PrimingFold& fold) {
  return json{{"p_at_k", fold.p_at_k},
              {"map", fold.map},
              {"precision_11pt", fold.precision11},
              {"auc", fold.auc},
              {"query_count", fold.query_count},
              {"skipped_documents", fold.skipped_documents}};
}

json completion_fold_json(const CompletionFold& fold) {
  return json{{"ndcg_at_k", fold.ndcg_at_k},
              {"averaging_ndcg", fold.averaging_ndcg},
              {"query_count", fold.query_count}};
}

}  // namespace

void write_priming_csv(const PrimingReport& report, const std::string& path) {
  auto out = open_out(path);
  out << "fold,metric,value\n";
  for (size_t f = 0; f < report.folds.size(); ++f) {
    const auto& fold = report.folds[f];
    out << f << ",map," << g17(fold.map) << "\n";
    out << f << ",auc," << g17(fold.auc) << "\n";
    for (size_t k = 0; k < fold.p_at_k.size(); ++k) {
      out << f << ",p_at_" << (k + 1) << "," << g17(fold.p_at_k[k]) << "\n";
    }
  }
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path);
}

void write_priming_json(const PrimingReport& report, const std::string& path) {
  json doc;
  doc["k_max"] = report.k_max;
  doc["folds"] = json::array();
  for (const auto& fold : report.folds) doc["folds"].push_back(priming_fold_json(fold));
  doc["mean"] = priming_fold_json(report.mean);
  doc["standard_error"] = priming_fold_json(report.standard_error);
  auto out = open_out(path);
  out << doc.dump(2) << "\n";
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path);
}

void write_pr_curve_csv(const PrimingReport& report, const std::string& path) {
  auto out = open_out(path);
  out << "recall_level,precision\n";
  for (size_t level = 0; level < report.mean.precision11.size(); ++level) {
    out << g17(level / 10.0) << "," << g17(report.mean.precision11[level]) << "\n";
  }
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path);
}

void write_completion_csv(const CompletionReport& report, const std::string& path) {
  auto out = open_out(path);
  out << "fold,metric,value\n";
  for (size_t f = 0; f < report.folds.size(); ++f) {
    const auto& fold = report.folds[f];
    out << f << ",averaging_ndcg," << g17(fold.averaging_ndcg) << "\n";
    for (size_t k = 0; k < fold.ndcg_at_k.size(); ++k) {
      out << f << ",ndcg_" << (k + 1) << "," << g17(fold.ndcg_at_k[k]) << "\n";
    }
  }
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path);
}

void write_completion_json(const CompletionReport& report, const std::string& path) {
  json doc;
  doc["max_k"] = report.max_k;
  doc["folds"] = json::array();
  for (const auto& fold : report.folds) doc["folds"].push_back(completion_fold_json(fold));
  doc["mean"] = completion_fold_json(report.mean);
  doc["standard_error"] = completion_fold_json(report.standard_error);
  auto out = open_out(path);
  out << doc.dump(2) << "\n";
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path);
}

}  // namespace tagsem
