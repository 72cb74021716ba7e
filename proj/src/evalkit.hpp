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

#ifndef TAGSEM_EVALKIT_HPP
#define TAGSEM_EVALKIT_HPP

#include <array>
#include <memory>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "corpus.hpp"
#include "embed.hpp"
#include "model.hpp"
#include "topics.hpp"

namespace tagsem {

/// A query's ranking over the candidate tags: a permutation of the candidate
/// set with scores in descending order, ties broken lexicographically.
struct RankedList {
  std::string query_tag;
  std::string doc_id;
  std::vector<std::string> tags;   // best first
  Vector scores;                   // aligned with tags, non-increasing
};

/// Sorts candidates by descending score with lexicographic tie-break.
RankedList make_ranked_list(std::string query_tag, std::string doc_id,
                            const std::vector<std::string>& candidates, const Vector& scores);

enum class RankingMode { kPrediction, kDistance };

struct DocView {
  std::string id;
  std::vector<std::string> tags;
};

/// Produces a ranking over the full vocabulary for a query tag in context.
class Ranker {
 public:
  virtual ~Ranker() = default;
  virtual RankedList rank(const std::string& query_tag, const DocView& doc) const = 0;
};

/// Ranks with the trained model. Prediction mode scores candidates by the
/// output activations for the query input; distance mode by negative
/// Euclidean CE distance. Out-of-vocabulary queries go through the companion
/// centroid. Instances memoize per-document state and are not thread-safe;
/// use one instance per thread.
class ModelRanker : public Ranker {
 public:
  ModelRanker(const EmbeddingModel& model, RankingMode mode);
  RankedList rank(const std::string& query_tag, const DocView& doc) const override;

 private:
  const EmbeddingModel& model_;
  RankingMode mode_;
  struct DocState;
  mutable std::shared_ptr<DocState> state_;
};

/// Uniform random permutation per query, seeded from (seed, doc, query).
class RandomRanker : public Ranker {
 public:
  RandomRanker(std::vector<std::string> vocabulary, uint64_t seed);
  RankedList rank(const std::string& query_tag, const DocView& doc) const override;

 private:
  std::vector<std::string> vocabulary_;
  uint64_t seed_;
};

/// LDA baseline: candidates scored by sum_t p(tag | topic) p(topic | doc).
/// The query tag itself does not influence the score.
class LdaRanker : public Ranker {
 public:
  LdaRanker(const TopicModel& topics, std::vector<std::string> vocabulary, uint64_t seed);
  RankedList rank(const std::string& query_tag, const DocView& doc) const override;

 private:
  const TopicModel& topics_;
  std::vector<std::string> vocabulary_;
  std::unordered_map<std::string, int> vocab_index_;
  uint64_t seed_;
};

/// Fraction of the top k candidates that are in the ground truth.
double precision_at_k(const RankedList& ranked, const std::unordered_set<std::string>& truth,
                      int k);

/// Mean of P@1 .. P@|truth| (average precision over the document length).
double map_score(const RankedList& ranked, const std::unordered_set<std::string>& truth);

/// Interpolated precision at recall levels 0.0, 0.1, ..., 1.0 plus the
/// trapezoidal area under those points.
struct PrCurve {
  std::array<double, 11> precision{};
  double auc = 0.0;
};
PrCurve eleven_point_auc(const RankedList& ranked, const std::unordered_set<std::string>& truth);

/// NDCG at k with DCG_k = rel(r[1]) + sum_{i>=2} rel(r[i]) / log2(i); tags
/// absent from the relevance map count as zero relevance.
double ndcg(const RankedList& ranked, const std::unordered_map<std::string, double>& relevance,
            int k);

/// NDCG_1..NDCG_K plus their mean (the averaging NDCG up to K).
struct NdcgCurve {
  Vector at_k;
  double average = 0.0;
};
NdcgCurve ndcg_curve(const RankedList& ranked,
                     const std::unordered_map<std::string, double>& relevance, int max_k);

/// Cohen's d with pooled standard deviation, plus the two-sample t statistic.
struct EffectSize {
  double cohens_d = 0.0;
  double t_statistic = 0.0;
};
EffectSize effect_size(const Vector& sample_a, const Vector& sample_b);

struct PrimingOptions {
  int k_max = 10;
  bool exclude_query = false;   // drop the query tag from truth and candidates
  bool oov_queries = false;     // query with the reserved tags instead
  std::vector<std::string> reserved_tags;   // required when oov_queries
};

/// Macro-averaged metrics for one fold of priming queries.
struct PrimingFold {
  Vector p_at_k;                    // index k-1
  double map = 0.0;
  std::array<double, 11> precision11{};
  double auc = 0.0;
  int query_count = 0;
  int skipped_documents = 0;
};

PrimingFold run_priming_fold(const Ranker& ranker, const std::vector<DocView>& documents,
                             const PrimingOptions& options);

/// Across-fold aggregation: mean and standard error per metric.
struct PrimingReport {
  std::vector<PrimingFold> folds;
  PrimingFold mean;
  PrimingFold standard_error;
  int k_max = 10;
};
PrimingReport aggregate_priming(std::vector<PrimingFold> folds);

struct CompletionFold {
  Vector ndcg_at_k;                 // index k-1
  double averaging_ndcg = 0.0;
  int query_count = 0;
};

CompletionFold run_completion_fold(const Ranker& ranker, const std::vector<DocView>& documents,
                                   const RelevanceTable& relevance, int max_k);

struct CompletionReport {
  std::vector<CompletionFold> folds;
  CompletionFold mean;
  CompletionFold standard_error;
  int max_k = 20;
};
CompletionReport aggregate_completion(std::vector<CompletionFold> folds);

/// Report files: CSV with one row per fold per metric, flat JSON summary with
/// per-fold values, means and standard errors, and the PR curve CSV.
void write_priming_csv(const PrimingReport& report, const std::string& path);
void write_priming_json(const PrimingReport& report, const std::string& path);
void write_pr_curve_csv(const PrimingReport& report, const std::string& path);
void write_completion_csv(const CompletionReport& report, const std::string& path);
void write_completion_json(const CompletionReport& report, const std::string& path);

}  // namespace tagsem

#endif  // TAGSEM_EVALKIT_HPP
