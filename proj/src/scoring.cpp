#include "juris/scoring.hpp"

#include <algorithm>
#include <cmath>

#include "juris/errors.hpp"
#include "juris/retrieval.hpp"

namespace juris {

// ---------------------------------------------------------------------------
// Heuristic scorers
// ---------------------------------------------------------------------------

ScorerSet heuristic_scorers(EmbedFn embed) {
  auto similarity = [embed](const std::string& a, const std::string& b) {
    return normalized_cosine(embed(a), embed(b));
  };
  ScorerSet set;
  set.sup = similarity;
  set.fv = similarity;
  set.valid = similarity;
  set.diff = [similarity](const std::string& a, const std::string& b) {
    return 1.0 - similarity(a, b);
  };
  return set;
}

// ---------------------------------------------------------------------------
// Charge selection
// ---------------------------------------------------------------------------

double align_charge_facts(const ChargeDef& charge, const JudicialFacts& facts,
                          const EmbedFn& embed) {
  return normalized_cosine(embed(charge.definition), embed(facts.concatenated()));
}

double align_charge_precedents(const ChargeDef& charge,
                               const std::vector<ScoredHit>& precedent_hits,
                               const PrecedentKb& precedents,
                               const ChargeKb& charges, const EmbedFn& embed) {
  if (precedent_hits.empty()) return 0.5;  // neutral
  const Embedding charge_vec = embed(charge.definition);

  double sum = 0.0;
  int used = 0;
  for (const auto& hit : precedent_hits) {
    const Precedent* p = precedents.find(hit.doc_id);
    if (!p) throw ValidationError("unknown precedent id " + hit.doc_id);
    if (p->charges.empty()) continue;
    double per_precedent = 0.0;
    for (const auto& cid : p->charges) {
      const ChargeDef* def = charges.find(cid);
      if (!def) {
        throw ValidationError("precedent " + hit.doc_id +
                              " references unknown charge " + cid);
      }
      per_precedent += normalized_cosine(charge_vec, embed(def->definition));
    }
    sum += per_precedent / static_cast<double>(p->charges.size());
    ++used;
  }
  if (used == 0) return 0.5;
  return sum / used;
}

SelectedCharge select_charge(const std::vector<ScoredHit>& candidates,
                             const JudicialFacts& facts,
                             const std::vector<ScoredHit>& precedent_hits,
                             const KbBundle& kb, double beta,
                             const EmbedFn& embed) {
  if (candidates.empty()) {
    throw ValidationError("no candidate charges retrieved");
  }
  if (!(beta >= 0.0 && beta <= 1.0)) {
    throw ValidationError("beta out of [0,1]");
  }
  SelectedCharge out;
  for (const auto& hit : candidates) {
    const ChargeDef* def = kb.charges.find(hit.doc_id);
    if (!def) throw ValidationError("unknown charge id " + hit.doc_id);
    ChargeCandidateScore score;
    score.charge_id = hit.doc_id;
    score.fact_alignment = align_charge_facts(*def, facts, embed);
    score.precedent_alignment = align_charge_precedents(
        *def, precedent_hits, kb.precedents, kb.charges, embed);
    score.combined =
        beta * score.fact_alignment + (1.0 - beta) * score.precedent_alignment;
    out.candidates.push_back(std::move(score));
  }
  const ChargeCandidateScore* best = &out.candidates[0];
  for (const auto& c : out.candidates) {
    if (c.combined > best->combined ||
        (c.combined == best->combined && c.charge_id < best->charge_id)) {
      best = &c;
    }
  }
  out.charge_id = best->charge_id;
  return out;
}

// ---------------------------------------------------------------------------
// Sentencing
// ---------------------------------------------------------------------------

namespace {

int round_half_up(double x) {
  return static_cast<int>(std::floor(x + 0.5));
}

}  // namespace

SentencingBreakdown compute_sentence(const ChargeDef& charge,
                                     const std::vector<ScoredHit>& precedent_hits,
                                     const PrecedentKb& precedents,
                                     int mitigating_count,
                                     const Hyperparameters& h) {
  if (mitigating_count < 0) {
    throw ValidationError("mitigating count must be >= 0");
  }
  SentencingBreakdown out;
  out.base_months = charge.base_sentence_months;
  out.mitigating_count = mitigating_count;

  // Precedents with month-valued terms contribute deviations; life/death
  // terms carry no month value and are excluded. A "none" term counts as 0.
  struct Contribution {
    double deviation;
    double weight_source;
  };
  std::vector<Contribution> included;
  for (const auto& hit : precedent_hits) {
    const Precedent* p = precedents.find(hit.doc_id);
    if (!p) throw ValidationError("unknown precedent id " + hit.doc_id);
    if (p->penalty.kind == PenaltyKind::Life || p->penalty.kind == PenaltyKind::Death) {
      continue;
    }
    const double months = p->penalty.kind == PenaltyKind::Months
                              ? static_cast<double>(p->penalty.months)
                              : 0.0;
    included.push_back({months - out.base_months, hit.score});
  }

  double deviation = 0.0;
  if (!included.empty()) {
    if (h.gamma_scheme == GammaScheme::Uniform) {
      for (const auto& c : included) deviation += c.deviation / included.size();
    } else {
      double total = 0.0;
      for (const auto& c : included) total += std::max(0.0, c.weight_source);
      if (total <= 0.0) {
        // degenerate weights: fall back to uniform
        for (const auto& c : included) deviation += c.deviation / included.size();
      } else {
        for (const auto& c : included) {
          deviation += c.deviation * (std::max(0.0, c.weight_source) / total);
        }
      }
    }
  }
  out.deviation_months = deviation;
  out.final_months = std::max(
      0, round_half_up(out.base_months + deviation - h.delta_months * mitigating_count));
  return out;
}

// ---------------------------------------------------------------------------
// Law filtering
// ---------------------------------------------------------------------------

FilteredLaws filter_laws(const std::vector<ScoredHit>& law_hits, const LawKb& laws,
                         const JudicialFacts& facts, double theta_law,
                         const EmbedFn& embed) {
  if (!(theta_law >= 0.0 && theta_law <= 1.0)) {
    throw ValidationError("theta_law out of [0,1]");
  }
  FilteredLaws out;
  if (law_hits.empty()) {
    out.empty_warning = true;
    return out;
  }
  const Embedding facts_vec = embed(facts.concatenated());
  for (const auto& hit : law_hits) {
    const LawArticle* art = laws.find(hit.doc_id);
    if (!art) throw ValidationError("unknown law article id " + hit.doc_id);
    const double match = normalized_cosine(embed(art->body), facts_vec);
    out.match_scores.emplace_back(hit.doc_id, match);
    if (match >= theta_law) out.kept.insert(hit.doc_id);
  }
  out.empty_warning = out.kept.empty();
  return out;
}

// ---------------------------------------------------------------------------
// Objections
// ---------------------------------------------------------------------------

ObjectionOutcome validate_objection(const std::string& claim,
                                    const Judgment& judgment,
                                    const std::string& case_text, double tau,
                                    const ScorerSet& scorers) {
  if (!(tau >= 0.0 && tau <= 1.0)) throw ValidationError("tau out of [0,1]");
  ObjectionOutcome out;
  double diff = 0.0, sup = 0.0;
  try {
    diff = scorers.diff(claim, judgment.to_text());
    sup = scorers.sup(claim, case_text);
  } catch (const std::exception& e) {
    out.rejection_reason = std::string("scorer failure: ") + e.what();
    return out;  // fail-closed
  }
  out.diff_score = diff;
  out.sup_score = sup;
  if (diff > tau && sup > tau) {
    out.objection = Objection{claim, diff, sup};
  } else {
    out.rejection_reason = "below threshold";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Appeal construction
// ---------------------------------------------------------------------------

AppealBuildResult build_appeal(const std::vector<Objection>& objections,
                               const std::vector<ScoredHit>& law_hits,
                               const LawKb& laws, const CaseSummary& summary,
                               double eta, const ScorerSet& scorers,
                               const ArgumentFn& argument) {
  if (objections.empty()) {
    throw ValidationError("build_appeal requires at least one objection");
  }
  if (!(eta >= 0.0 && eta <= 1.0)) throw ValidationError("eta out of [0,1]");

  AppealBuildResult out;
  for (size_t i = 0; i < objections.size(); ++i) {
    const Objection& o = objections[i];
    AppealItem item;
    item.objection = o;
    for (const auto& hit : law_hits) {
      const LawArticle* art = laws.find(hit.doc_id);
      if (!art) throw ValidationError("unknown law article id " + hit.doc_id);
      const double fv = scorers.fv(art->body, o.claim_text);
      if (fv > eta) item.supporting_laws.emplace_back(hit.doc_id, fv);
    }
    try {
      item.contextual_argument = argument(o, summary);
    } catch (const std::exception& e) {
      out.notes.push_back("argument generation failed for objection " +
                          std::to_string(i) + ": " + e.what());
    }
    out.brief.items.push_back(std::move(item));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Appeal validity and final decision
// ---------------------------------------------------------------------------

namespace {

std::string item_text(const AppealItem& item) {
  std::string text = item.objection.claim_text;
  if (!item.contextual_argument.empty()) {
    text += "\n" + item.contextual_argument;
  }
  return text;
}

std::string law_context(const std::vector<ScoredHit>& law_hits, const LawKb& laws) {
  std::string out;
  for (const auto& hit : law_hits) {
    if (const LawArticle* art = laws.find(hit.doc_id)) {
      out += art->body + "\n";
    }
  }
  return out;
}

}  // namespace

ValidityResult appeal_validity(const AppealBrief& brief,
                               const std::string& case_text,
                               const std::vector<ScoredHit>& law_hits,
                               const LawKb& laws, double theta_val,
                               const ScorerSet& scorers) {
  if (brief.items.empty()) {
    throw ValidationError("appeal_validity requires a non-empty brief");
  }
  if (!(theta_val >= 0.0 && theta_val <= 1.0)) {
    throw ValidationError("theta_val out of [0,1]");
  }
  const std::string law_text = law_context(law_hits, laws);

  ValidityResult out;
  double sum = 0.0;
  for (size_t i = 0; i < brief.items.size(); ++i) {
    const std::string text = item_text(brief.items[i]);
    double item_score = 0.0;
    try {
      const double v_fact = scorers.valid(text, case_text);
      const double v_law = law_text.empty() ? 0.0 : scorers.valid(text, law_text);
      item_score = theta_val * v_fact + (1.0 - theta_val) * v_law;
    } catch (const std::exception& e) {
      out.notes.push_back("validity scoring failed for item " + std::to_string(i) +
                          ": " + e.what());
      item_score = 0.0;  // fail-closed
    }
    sum += item_score;
  }
  out.score = sum / static_cast<double>(brief.items.size());
  return out;
}

FinalDecision decide_final(const Judgment& judgment,
                           const std::optional<AppealBrief>& brief, double val,
                           double epsilon, const ReviseFn& revise) {
  FinalDecision out;
  if (!brief.has_value()) {
    out.final = FinalJudgment{judgment, false, 0.0, 1};
    return out;
  }
  if (!(val >= 0.0 && val <= 1.0)) {
    throw ValidationError("validity score out of [0,1]");
  }
  out.final.validity_score = val;
  out.final.instance_count = 2;
  if (val >= epsilon) {
    try {
      out.final.judgment = revise(judgment, *brief);
      out.final.revised = true;
      return out;
    } catch (const std::exception& e) {
      out.note = std::string("revision failed, first-instance judgment stands: ") +
                 e.what();
    }
  }
  out.final.judgment = judgment;
  out.final.revised = false;
  return out;
}

}  // namespace juris
