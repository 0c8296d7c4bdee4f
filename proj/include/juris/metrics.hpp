#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "juris/domain.hpp"
#include "juris/pipeline.hpp"

namespace juris {

// ---------------------------------------------------------------------------
// Core metric operations
// ---------------------------------------------------------------------------

struct MacroPrf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Per-label P/R/F1 over the union of labels appearing in gold or predictions,
// averaged with equal label weight. Zero-denominator components contribute 0;
// F1 is computed per label and then averaged.
MacroPrf macro_prf(const std::vector<std::set<std::string>>& golds,
                   const std::vector<std::set<std::string>>& preds);

enum class AccuracyMode { ExactSet, PrimaryHit };

// exact_set: fraction of cases whose predicted set equals the gold set.
// primary_hit: fraction whose (single) predicted label is in the gold set.
double accuracy(const std::vector<std::set<std::string>>& golds,
                const std::vector<std::set<std::string>>& preds,
                AccuracyMode mode);

inline const std::vector<int> kDefaultPenaltyEdges = {0,  6,  9,  12, 24,
                                                      36, 60, 84, 120, 300};

// Maps a penalty term onto right-inclusive month intervals: bucket 0 covers
// [0, edges[1]], the last finite bucket is (edges.back(), inf), and
// life/death map to the terminal bucket (index = edges.size()).
int bucketize_penalty(const PenaltyTerm& term, const std::vector<int>& edges);

// 1 - |ln(1+pred) - ln(1+gold)| / ln(1+t_max), months clamped to t_max and
// life/death mapped to t_max, clipped into [0,1].
double n_ld(const PenaltyTerm& pred, const PenaltyTerm& gold, int t_max_months);

// ---------------------------------------------------------------------------
// Run evaluation
// ---------------------------------------------------------------------------

struct PredictionRecord {
  std::string case_id;
  std::set<std::string> predicted_articles;
  std::string predicted_charge;
  PenaltyTerm predicted_term;
};

struct TaskMetrics {
  double accuracy = 0.0;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
};

struct EvalConfig {
  std::vector<int> penalty_edges = kDefaultPenaltyEdges;
  int t_max_months = 300;
};

struct MetricsReport {
  int cases = 0;
  TaskMetrics law;      // multi-label, exact-set accuracy
  TaskMetrics charge;   // single-label, primary-hit accuracy
  TaskMetrics penalty;  // bucketized single-label
  double penalty_n_ld = 0.0;
  std::map<std::string, int> law_support;     // gold label -> case count
  std::map<std::string, int> charge_support;
  std::map<std::string, int> penalty_support;  // bucket label -> case count

  Json to_json() const;
  // Aligned plain-text table: Acc, MP, MR, MF, N-Ld per task.
  std::string to_table() const;
};

PredictionRecord prediction_of(const TrialOutcome& outcome);

// Assembles prediction records from final judgments and scores all three
// tasks. Unknown case ids and empty outcome lists are errors.
MetricsReport evaluate_run(const std::vector<TrialOutcome>& outcomes,
                           const std::vector<CaseRecord>& golds,
                           const EvalConfig& config = {});

}  // namespace juris
