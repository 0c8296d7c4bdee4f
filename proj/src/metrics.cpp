#include "juris/metrics.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <unordered_map>

#include "juris/errors.hpp"

namespace juris {

MacroPrf macro_prf(const std::vector<std::set<std::string>>& golds,
                   const std::vector<std::set<std::string>>& preds) {
  if (golds.size() != preds.size()) {
    throw ValidationError("macro_prf: gold/pred length mismatch");
  }
  std::set<std::string> labels;
  for (const auto& g : golds) labels.insert(g.begin(), g.end());
  for (const auto& p : preds) labels.insert(p.begin(), p.end());
  if (labels.empty()) return {};

  MacroPrf out;
  for (const auto& label : labels) {
    long long tp = 0, fp = 0, fn = 0;
    for (size_t i = 0; i < golds.size(); ++i) {
      const bool in_gold = golds[i].count(label) > 0;
      const bool in_pred = preds[i].count(label) > 0;
      tp += (in_gold && in_pred);
      fp += (!in_gold && in_pred);
      fn += (in_gold && !in_pred);
    }
    const double p = (tp + fp) == 0 ? 0.0 : static_cast<double>(tp) / (tp + fp);
    const double r = (tp + fn) == 0 ? 0.0 : static_cast<double>(tp) / (tp + fn);
    const double f1 = (p + r) == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
    out.precision += p;
    out.recall += r;
    out.f1 += f1;
  }
  const double n = static_cast<double>(labels.size());
  out.precision /= n;
  out.recall /= n;
  out.f1 /= n;
  return out;
}

double accuracy(const std::vector<std::set<std::string>>& golds,
                const std::vector<std::set<std::string>>& preds,
                AccuracyMode mode) {
  if (golds.size() != preds.size()) {
    throw ValidationError("accuracy: gold/pred length mismatch");
  }
  if (golds.empty()) return 0.0;
  long long correct = 0;
  for (size_t i = 0; i < golds.size(); ++i) {
    if (mode == AccuracyMode::ExactSet) {
      correct += (golds[i] == preds[i]);
    } else {
      correct += (!preds[i].empty() && golds[i].count(*preds[i].begin()) > 0);
    }
  }
  return static_cast<double>(correct) / static_cast<double>(golds.size());
}

int bucketize_penalty(const PenaltyTerm& term, const std::vector<int>& edges) {
  if (edges.size() < 2 || edges.front() != 0 ||
      !std::is_sorted(edges.begin(), edges.end()) ||
      std::adjacent_find(edges.begin(), edges.end()) != edges.end()) {
    throw ValidationError("penalty edges must be strictly ascending from 0");
  }
  if (term.kind == PenaltyKind::Life || term.kind == PenaltyKind::Death) {
    return static_cast<int>(edges.size());  // terminal bucket
  }
  const int m = term.kind == PenaltyKind::Months ? term.months : 0;
  if (m == 0) return 0;
  for (size_t i = 1; i < edges.size(); ++i) {
    if (m <= edges[i]) return static_cast<int>(i) - 1;
  }
  return static_cast<int>(edges.size()) - 1;  // beyond the last edge
}

namespace {

double clamped_months(const PenaltyTerm& term, int t_max) {
  switch (term.kind) {
    case PenaltyKind::Months:
      return std::min(term.months, t_max);
    case PenaltyKind::Life:
    case PenaltyKind::Death:
      return t_max;
    case PenaltyKind::None:
      return 0.0;
  }
  return 0.0;
}

}  // namespace

double n_ld(const PenaltyTerm& pred, const PenaltyTerm& gold, int t_max_months) {
  if (t_max_months <= 0) throw ValidationError("t_max_months must be positive");
  const double p = clamped_months(pred, t_max_months);
  const double g = clamped_months(gold, t_max_months);
  const double dist = std::abs(std::log1p(p) - std::log1p(g));
  const double score = 1.0 - dist / std::log1p(static_cast<double>(t_max_months));
  return std::clamp(score, 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Run evaluation
// ---------------------------------------------------------------------------

PredictionRecord prediction_of(const TrialOutcome& outcome) {
  PredictionRecord pred;
  pred.case_id = outcome.case_id;
  pred.predicted_articles = outcome.final.judgment.filtered_laws;
  pred.predicted_charge = outcome.final.judgment.charge;
  pred.predicted_term = outcome.final.judgment.term;
  return pred;
}

MetricsReport evaluate_run(const std::vector<TrialOutcome>& outcomes,
                           const std::vector<CaseRecord>& golds,
                           const EvalConfig& config) {
  if (outcomes.empty()) throw ValidationError("no predictions");

  std::unordered_map<std::string, const CaseRecord*> gold_of;
  for (const auto& g : golds) gold_of.emplace(g.case_id, &g);

  std::vector<std::set<std::string>> law_gold, law_pred;
  std::vector<std::set<std::string>> charge_gold, charge_pred;
  std::vector<std::set<std::string>> bucket_gold, bucket_pred;
  MetricsReport report;
  double n_ld_sum = 0.0;

  for (const auto& outcome : outcomes) {
    auto it = gold_of.find(outcome.case_id);
    if (it == gold_of.end()) {
      throw ValidationError("no gold record for case " + outcome.case_id);
    }
    const CaseRecord& gold = *it->second;
    const PredictionRecord pred = prediction_of(outcome);

    law_gold.push_back(gold.gold_articles);
    law_pred.push_back(pred.predicted_articles);
    for (const auto& a : gold.gold_articles) ++report.law_support[a];

    charge_gold.push_back(gold.gold_charges);
    charge_pred.push_back({pred.predicted_charge});
    for (const auto& c : gold.gold_charges) ++report.charge_support[c];

    const int gb = bucketize_penalty(gold.gold_penalty, config.penalty_edges);
    const int pb = bucketize_penalty(pred.predicted_term, config.penalty_edges);
    bucket_gold.push_back({"b" + std::to_string(gb)});
    bucket_pred.push_back({"b" + std::to_string(pb)});
    ++report.penalty_support["b" + std::to_string(gb)];

    n_ld_sum += n_ld(pred.predicted_term, gold.gold_penalty, config.t_max_months);
  }

  report.cases = static_cast<int>(outcomes.size());

  const MacroPrf law = macro_prf(law_gold, law_pred);
  report.law = {accuracy(law_gold, law_pred, AccuracyMode::ExactSet),
                law.precision, law.recall, law.f1};

  const MacroPrf charge = macro_prf(charge_gold, charge_pred);
  report.charge = {accuracy(charge_gold, charge_pred, AccuracyMode::PrimaryHit),
                   charge.precision, charge.recall, charge.f1};

  const MacroPrf penalty = macro_prf(bucket_gold, bucket_pred);
  report.penalty = {accuracy(bucket_gold, bucket_pred, AccuracyMode::ExactSet),
                    penalty.precision, penalty.recall, penalty.f1};
  report.penalty_n_ld = n_ld_sum / report.cases;
  return report;
}

namespace {

Json task_json(const TaskMetrics& t) {
  return Json{{"accuracy", t.accuracy},
              {"macro_precision", t.macro_precision},
              {"macro_recall", t.macro_recall},
              {"macro_f1", t.macro_f1}};
}

}  // namespace

Json MetricsReport::to_json() const {
  Json law_task = task_json(law);
  Json charge_task = task_json(charge);
  Json penalty_task = task_json(penalty);
  penalty_task["n_ld"] = penalty_n_ld;
  return Json{{"cases", cases},
              {"law_articles", law_task},
              {"charges", charge_task},
              {"penalty", penalty_task},
              {"support",
               {{"law_articles", law_support},
                {"charges", charge_support},
                {"penalty_buckets", penalty_support}}},
              {"notes",
               "macro metrics average over labels observed in gold or "
               "predictions; law accuracy is exact-set, charge accuracy is "
               "primary-hit"}};
}

std::string MetricsReport::to_table() const {
  std::ostringstream out;
  out << std::left << std::setw(14) << "task" << std::right;
  for (const char* col : {"Acc", "MP", "MR", "MF", "N-Ld"}) {
    out << std::setw(9) << col;
  }
  out << "\n";
  auto row = [&out](const char* name, const TaskMetrics& t, double nld,
                    bool has_nld) {
    out << std::left << std::setw(14) << name << std::right << std::fixed
        << std::setprecision(4);
    out << std::setw(9) << t.accuracy << std::setw(9) << t.macro_precision
        << std::setw(9) << t.macro_recall << std::setw(9) << t.macro_f1;
    if (has_nld) {
      out << std::setw(9) << nld;
    } else {
      out << std::setw(9) << "---";
    }
    out << "\n";
  };
  row("law_articles", law, 0.0, false);
  row("charges", charge, 0.0, false);
  row("penalty", penalty, penalty_n_ld, true);
  return out.str();
}

}  // namespace juris
