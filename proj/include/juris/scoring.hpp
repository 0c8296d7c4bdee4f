#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "juris/domain.hpp"
#include "juris/embedding.hpp"
#include "juris/kb.hpp"

namespace juris {

// ---------------------------------------------------------------------------
// Scorer interfaces
// ---------------------------------------------------------------------------

// Pairwise text scorers returning values in [0,1]; they throw on failure and
// each operation applies its own fail-open/closed policy.
using PairScorer = std::function<double(const std::string&, const std::string&)>;

struct ScorerSet {
  PairScorer diff;   // divergence of a claim from the judgment
  PairScorer sup;    // support of a claim by the case text
  PairScorer fv;     // legal support of a law body for a claim
  PairScorer valid;  // soundness of an appeal item against a context
};

// Deterministic embedding-based scorers: normalized cosine for sup/fv/valid,
// 1 - normalized cosine for diff.
ScorerSet heuristic_scorers(EmbedFn embed);

// ---------------------------------------------------------------------------
// Charge selection
// ---------------------------------------------------------------------------

struct ChargeCandidateScore {
  std::string charge_id;
  double fact_alignment = 0.0;       // in [0,1]
  double precedent_alignment = 0.0;  // in [0,1]
  double combined = 0.0;             // beta * fact + (1-beta) * precedent
};

// Normalized cosine between the charge definition and the concatenated
// judicial facts.
double align_charge_facts(const ChargeDef& charge, const JudicialFacts& facts,
                          const EmbedFn& embed);

// Mean normalized cosine between the charge definition and the charge
// definitions carried by retrieved precedents; 0.5 (neutral) when the hit
// list is empty. Unknown charge ids inside a precedent are errors.
double align_charge_precedents(const ChargeDef& charge,
                               const std::vector<ScoredHit>& precedent_hits,
                               const PrecedentKb& precedents,
                               const ChargeKb& charges, const EmbedFn& embed);

struct SelectedCharge {
  std::string charge_id;
  std::vector<ChargeCandidateScore> candidates;  // in input order
};

// Argmax of combined score over the candidate hits; ties broken by ascending
// charge_id. Empty candidate list is an error.
SelectedCharge select_charge(const std::vector<ScoredHit>& candidates,
                             const JudicialFacts& facts,
                             const std::vector<ScoredHit>& precedent_hits,
                             const KbBundle& kb, double beta,
                             const EmbedFn& embed);

// ---------------------------------------------------------------------------
// Sentencing
// ---------------------------------------------------------------------------

struct SentencingBreakdown {
  int base_months = 0;
  double deviation_months = 0.0;  // weighted precedent deviation D
  int mitigating_count = 0;
  int final_months = 0;  // max(0, round(base + D - delta * M))
};

// Weighted precedent deviation plus mitigating reduction over the statutory
// base. Life/death precedents are excluded; weights are normalized over the
// included precedents (uniform or retrieval-score-weighted).
SentencingBreakdown compute_sentence(const ChargeDef& charge,
                                     const std::vector<ScoredHit>& precedent_hits,
                                     const PrecedentKb& precedents,
                                     int mitigating_count,
                                     const Hyperparameters& h);

// ---------------------------------------------------------------------------
// Law filtering
// ---------------------------------------------------------------------------

struct FilteredLaws {
  std::set<std::string> kept;
  std::vector<std::pair<std::string, double>> match_scores;  // per retrieved law
  bool empty_warning = false;
};

// Keeps retrieved articles whose normalized cosine match against the facts
// meets theta_law (inclusive). An empty result is legal and flagged.
FilteredLaws filter_laws(const std::vector<ScoredHit>& law_hits, const LawKb& laws,
                         const JudicialFacts& facts, double theta_law,
                         const EmbedFn& embed);

// ---------------------------------------------------------------------------
// Objections, appeal, final decision
// ---------------------------------------------------------------------------

struct ObjectionOutcome {
  std::optional<Objection> objection;  // present iff accepted
  double diff_score = 0.0;
  double sup_score = 0.0;
  std::string rejection_reason;  // set iff rejected
};

// Accepts a claim iff Diff > tau and Sup > tau (strict). Scorer failure
// rejects the claim with the error recorded (fail-closed).
ObjectionOutcome validate_objection(const std::string& claim,
                                    const Judgment& judgment,
                                    const std::string& case_text, double tau,
                                    const ScorerSet& scorers);

// Produces the contextual argument for one appeal item; failures may throw.
using ArgumentFn =
    std::function<std::string(const Objection&, const CaseSummary&)>;

struct AppealBuildResult {
  AppealBrief brief;
  std::vector<std::string> notes;  // flagged argument failures
};

// Attaches laws with Fv > eta (strict) and a contextual argument to each
// objection. Argument failure keeps the item, flagged without argument.
AppealBuildResult build_appeal(const std::vector<Objection>& objections,
                               const std::vector<ScoredHit>& law_hits,
                               const LawKb& laws, const CaseSummary& summary,
                               double eta, const ScorerSet& scorers,
                               const ArgumentFn& argument);

struct ValidityResult {
  double score = 0.0;
  std::vector<std::string> notes;  // flagged per-item scorer failures
};

// Mean over items of theta_val * Valid(a, case_text)
// + (1 - theta_val) * Valid(a, retrieved law bodies). A scorer failure
// zeroes that item (fail-closed), flagged.
ValidityResult appeal_validity(const AppealBrief& brief,
                               const std::string& case_text,
                               const std::vector<ScoredHit>& law_hits,
                               const LawKb& laws, double theta_val,
                               const ScorerSet& scorers);

using ReviseFn = std::function<Judgment(const Judgment&, const AppealBrief&)>;

struct FinalDecision {
  FinalJudgment final;
  std::string note;  // set when revision failed and the trial fell back
};

// No brief -> first-instance judgment stands (instance 1). val < epsilon ->
// judgment stands (instance 2). val >= epsilon -> revise; a revision failure
// falls back to the first-instance judgment so the trial always terminates.
FinalDecision decide_final(const Judgment& judgment,
                           const std::optional<AppealBrief>& brief, double val,
                           double epsilon, const ReviseFn& revise);

}  // namespace juris
