#include "juris/domain.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <sstream>
#include <unordered_set>

#include "juris/errors.hpp"

namespace juris {

// ---------------------------------------------------------------------------
// Enum names
// ---------------------------------------------------------------------------

std::string to_string(PenaltyKind kind) {
  switch (kind) {
    case PenaltyKind::Months: return "months";
    case PenaltyKind::Life: return "life";
    case PenaltyKind::Death: return "death";
    case PenaltyKind::None: return "none";
  }
  throw Error("unreachable penalty kind");
}

PenaltyKind penalty_kind_from_string(const std::string& s) {
  if (s == "months") return PenaltyKind::Months;
  if (s == "life") return PenaltyKind::Life;
  if (s == "death") return PenaltyKind::Death;
  if (s == "none") return PenaltyKind::None;
  throw ParseError("unknown penalty kind: " + s);
}

std::string to_string(GammaScheme scheme) {
  return scheme == GammaScheme::Uniform ? "uniform" : "similarity_weighted";
}

GammaScheme gamma_scheme_from_string(const std::string& s) {
  if (s == "uniform") return GammaScheme::Uniform;
  if (s == "similarity_weighted") return GammaScheme::SimilarityWeighted;
  throw ParseError("unknown gamma scheme: " + s);
}

std::string to_string(Stage stage) {
  switch (stage) {
    case Stage::I: return "I";
    case Stage::II: return "II";
    case Stage::III: return "III";
    case Stage::IV: return "IV";
    case Stage::V: return "V";
    case Stage::VI: return "VI";
  }
  throw Error("unreachable stage");
}

Stage stage_from_string(const std::string& s) {
  if (s == "I") return Stage::I;
  if (s == "II") return Stage::II;
  if (s == "III") return Stage::III;
  if (s == "IV") return Stage::IV;
  if (s == "V") return Stage::V;
  if (s == "VI") return Stage::VI;
  throw ParseError("unknown stage: " + s);
}

std::string to_string(Role role) {
  switch (role) {
    case Role::JJ: return "JJ";
    case Role::SJ: return "SJ";
    case Role::Assistant: return "Assistant";
    case Role::CJ: return "CJ";
    case Role::Defendant: return "Defendant";
    case Role::LegalCounsel: return "LegalCounsel";
  }
  throw Error("unreachable role");
}

Role role_from_string(const std::string& s) {
  if (s == "JJ") return Role::JJ;
  if (s == "SJ") return Role::SJ;
  if (s == "Assistant") return Role::Assistant;
  if (s == "CJ") return Role::CJ;
  if (s == "Defendant") return Role::Defendant;
  if (s == "LegalCounsel") return Role::LegalCounsel;
  throw ParseError("unknown role: " + s);
}

// ---------------------------------------------------------------------------
// Text renderings
// ---------------------------------------------------------------------------

std::string JudicialFacts::concatenated() const {
  return defendant_identification + "\n" + crime_details + "\n" + criminal_motive;
}

std::string Judgment::to_text() const {
  std::ostringstream out;
  out << "charge: " << charge << "\nlaws:";
  for (const auto& id : filtered_laws) out << " " << id;
  out << "\nterm: ";
  if (term.kind == PenaltyKind::Months) {
    out << term.months << " months";
  } else {
    out << to_string(term.kind);
  }
  return out.str();
}

std::string AppealBrief::to_text() const {
  std::ostringstream out;
  for (size_t i = 0; i < items.size(); ++i) {
    const AppealItem& item = items[i];
    if (i) out << "\n";
    out << "objection: " << item.objection.claim_text << "\nsupporting laws:";
    for (const auto& [id, fv] : item.supporting_laws) out << " " << id;
    if (!item.contextual_argument.empty()) {
      out << "\nargument: " << item.contextual_argument;
    }
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Hyperparameter validation
// ---------------------------------------------------------------------------

namespace {

void require_unit_interval(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw ValidationError(std::string(name) + " out of [0,1]");
  }
}

}  // namespace

const Hyperparameters& validate_hyperparameters(const Hyperparameters& h) {
  require_unit_interval(h.alpha, "alpha");
  require_unit_interval(h.beta, "beta");
  require_unit_interval(h.theta_law, "theta_law");
  require_unit_interval(h.tau, "tau");
  require_unit_interval(h.eta, "eta");
  require_unit_interval(h.theta_val, "theta_val");
  require_unit_interval(h.epsilon, "epsilon");
  if (!(h.delta_months > 0.0)) throw ValidationError("delta_months must be > 0");
  if (h.top_k < 1) throw ValidationError("top_k must be >= 1");
  return h;
}

// ---------------------------------------------------------------------------
// Transcript queries
// ---------------------------------------------------------------------------

bool Transcript::has_stage(Stage s) const { return count_stage(s) > 0; }

int Transcript::count_stage(Stage s) const {
  int n = 0;
  for (const auto& r : records) n += (r.stage == s);
  return n;
}

long long Transcript::total_llm_calls() const {
  long long n = 0;
  for (const auto& r : records) n += static_cast<long long>(r.llm_calls.size());
  return n;
}

// ---------------------------------------------------------------------------
// JSON hooks
// ---------------------------------------------------------------------------

void to_json(Json& j, const PenaltyTerm& t) {
  j = Json{{"kind", to_string(t.kind)}};
  if (t.kind == PenaltyKind::Months) j["months"] = t.months;
}

void from_json(const Json& j, PenaltyTerm& t) {
  t.kind = penalty_kind_from_string(j.at("kind").get<std::string>());
  if (t.kind == PenaltyKind::Months) {
    t.months = j.at("months").get<int>();
    if (t.months < 0) throw ValidationError("penalty months must be >= 0");
  } else {
    if (j.contains("months")) {
      throw ValidationError("months present on non-months penalty");
    }
    t.months = 0;
  }
}

void to_json(Json& j, const CaseRecord& c) {
  j = Json{{"case_id", c.case_id},
           {"fact", c.fact_text},
           {"articles", c.gold_articles},
           {"charges", c.gold_charges},
           {"penalty", c.gold_penalty}};
}

void from_json(const Json& j, CaseRecord& c) {
  j.at("case_id").get_to(c.case_id);
  j.at("fact").get_to(c.fact_text);
  j.at("articles").get_to(c.gold_articles);
  j.at("charges").get_to(c.gold_charges);
  j.at("penalty").get_to(c.gold_penalty);
  if (c.fact_text.empty()) {
    throw ValidationError("case " + c.case_id + " has empty fact text");
  }
}

void to_json(Json& j, const JudicialFacts& f) {
  j = Json{{"defendant_identification", f.defendant_identification},
           {"crime_details", f.crime_details},
           {"criminal_motive", f.criminal_motive}};
}

void from_json(const Json& j, JudicialFacts& f) {
  j.at("defendant_identification").get_to(f.defendant_identification);
  j.at("crime_details").get_to(f.crime_details);
  j.at("criminal_motive").get_to(f.criminal_motive);
}

void to_json(Json& j, const CaseSummary& s) {
  j = Json{{"summary_text", s.summary_text},
           {"consistency_score", s.consistency_score},
           {"flagged_gaps", s.flagged_gaps}};
}

void from_json(const Json& j, CaseSummary& s) {
  j.at("summary_text").get_to(s.summary_text);
  j.at("consistency_score").get_to(s.consistency_score);
  j.at("flagged_gaps").get_to(s.flagged_gaps);
}

void to_json(Json& j, const ScoredHit& h) {
  j = Json{{"doc_id", h.doc_id}, {"score", h.score}};
}

void from_json(const Json& j, ScoredHit& h) {
  j.at("doc_id").get_to(h.doc_id);
  j.at("score").get_to(h.score);
}

void to_json(Json& j, const RetrievalBundle& b) {
  j = Json{{"law_hits", b.law_hits},
           {"charge_hits", b.charge_hits},
           {"precedent_hits", b.precedent_hits},
           {"concatenated_document", b.concatenated_document}};
}

void from_json(const Json& j, RetrievalBundle& b) {
  j.at("law_hits").get_to(b.law_hits);
  j.at("charge_hits").get_to(b.charge_hits);
  j.at("precedent_hits").get_to(b.precedent_hits);
  j.at("concatenated_document").get_to(b.concatenated_document);
}

void to_json(Json& j, const Judgment& g) {
  j = Json{{"filtered_laws", g.filtered_laws},
           {"charge", g.charge},
           {"term", g.term}};
}

void from_json(const Json& j, Judgment& g) {
  j.at("filtered_laws").get_to(g.filtered_laws);
  j.at("charge").get_to(g.charge);
  j.at("term").get_to(g.term);
}

void to_json(Json& j, const Objection& o) {
  j = Json{{"claim_text", o.claim_text},
           {"diff_score", o.diff_score},
           {"sup_score", o.sup_score}};
}

void from_json(const Json& j, Objection& o) {
  j.at("claim_text").get_to(o.claim_text);
  j.at("diff_score").get_to(o.diff_score);
  j.at("sup_score").get_to(o.sup_score);
}

void to_json(Json& j, const AppealItem& a) {
  Json laws = Json::array();
  for (const auto& [id, fv] : a.supporting_laws) {
    laws.push_back(Json{{"article_id", id}, {"fv_score", fv}});
  }
  j = Json{{"objection", a.objection},
           {"supporting_laws", laws},
           {"contextual_argument", a.contextual_argument}};
}

void from_json(const Json& j, AppealItem& a) {
  j.at("objection").get_to(a.objection);
  a.supporting_laws.clear();
  for (const auto& l : j.at("supporting_laws")) {
    a.supporting_laws.emplace_back(l.at("article_id").get<std::string>(),
                                   l.at("fv_score").get<double>());
  }
  j.at("contextual_argument").get_to(a.contextual_argument);
}

void to_json(Json& j, const AppealBrief& a) { j = Json{{"items", a.items}}; }

void from_json(const Json& j, AppealBrief& a) { j.at("items").get_to(a.items); }

void to_json(Json& j, const FinalJudgment& f) {
  j = Json{{"judgment", f.judgment},
           {"revised", f.revised},
           {"validity_score", f.validity_score},
           {"instance_count", f.instance_count}};
}

void from_json(const Json& j, FinalJudgment& f) {
  j.at("judgment").get_to(f.judgment);
  j.at("revised").get_to(f.revised);
  j.at("validity_score").get_to(f.validity_score);
  j.at("instance_count").get_to(f.instance_count);
}

void to_json(Json& j, const Hyperparameters& h) {
  j = Json{{"alpha", h.alpha},
           {"beta", h.beta},
           {"gamma_scheme", to_string(h.gamma_scheme)},
           {"delta_months", h.delta_months},
           {"theta_law", h.theta_law},
           {"tau", h.tau},
           {"eta", h.eta},
           {"theta_val", h.theta_val},
           {"epsilon", h.epsilon},
           {"top_k", h.top_k}};
}

void from_json(const Json& j, Hyperparameters& h) {
  j.at("alpha").get_to(h.alpha);
  j.at("beta").get_to(h.beta);
  h.gamma_scheme = gamma_scheme_from_string(j.at("gamma_scheme").get<std::string>());
  j.at("delta_months").get_to(h.delta_months);
  j.at("theta_law").get_to(h.theta_law);
  j.at("tau").get_to(h.tau);
  j.at("eta").get_to(h.eta);
  j.at("theta_val").get_to(h.theta_val);
  j.at("epsilon").get_to(h.epsilon);
  j.at("top_k").get_to(h.top_k);
}

void to_json(Json& j, const LlmCall& c) {
  j = Json{{"prompt_digest", c.prompt_digest},
           {"response_digest", c.response_digest},
           {"temperature", c.temperature},
           {"tokens", c.tokens}};
}

void from_json(const Json& j, LlmCall& c) {
  j.at("prompt_digest").get_to(c.prompt_digest);
  j.at("response_digest").get_to(c.response_digest);
  j.at("temperature").get_to(c.temperature);
  j.at("tokens").get_to(c.tokens);
}

void to_json(Json& j, const StageRecord& r) {
  j = Json{{"stage", to_string(r.stage)},
           {"role", to_string(r.role)},
           {"inputs_digest", r.inputs_digest},
           {"output_payload", r.output_payload},
           {"llm_calls", r.llm_calls},
           {"notes", r.notes}};
}

void from_json(const Json& j, StageRecord& r) {
  r.stage = stage_from_string(j.at("stage").get<std::string>());
  r.role = role_from_string(j.at("role").get<std::string>());
  j.at("inputs_digest").get_to(r.inputs_digest);
  j.at("output_payload").get_to(r.output_payload);
  j.at("llm_calls").get_to(r.llm_calls);
  j.at("notes").get_to(r.notes);
}

void to_json(Json& j, const Transcript& t) {
  j = Json{{"config_echo", t.config_echo}, {"records", t.records}};
}

void from_json(const Json& j, Transcript& t) {
  t.config_echo = j.value("config_echo", "");
  j.at("records").get_to(t.records);
}

// ---------------------------------------------------------------------------
// Dataset loading
// ---------------------------------------------------------------------------

std::vector<CaseRecord> load_cases(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open case file: " + path);

  std::vector<CaseRecord> cases;
  std::unordered_set<std::string> seen;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    CaseRecord rec;
    try {
      rec = Json::parse(line).get<CaseRecord>();
    } catch (const ValidationError&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (!seen.insert(rec.case_id).second) {
      throw ValidationError("duplicate case_id " + rec.case_id + " at " + path +
                            ":" + std::to_string(line_no));
    }
    cases.push_back(std::move(rec));
  }
  return cases;
}

}  // namespace juris
