#pragma once

#include <nlohmann/json_fwd.hpp>

#include <set>
#include <string>
#include <utility>
#include <vector>

namespace juris {

using Json = nlohmann::json;

// ---------------------------------------------------------------------------
// Penalty terms
// ---------------------------------------------------------------------------

enum class PenaltyKind { Months, Life, Death, None };

// A criminal sentence. `months` is meaningful only when kind == Months;
// life and death sentences are explicit sentinels rather than magic month
// counts so that metrics can apply their own clamping rule.
struct PenaltyTerm {
  PenaltyKind kind = PenaltyKind::None;
  int months = 0;

  static PenaltyTerm of_months(int m) { return {PenaltyKind::Months, m}; }
  static PenaltyTerm life() { return {PenaltyKind::Life, 0}; }
  static PenaltyTerm death() { return {PenaltyKind::Death, 0}; }
  static PenaltyTerm none() { return {PenaltyKind::None, 0}; }

  bool operator==(const PenaltyTerm&) const = default;
};

std::string to_string(PenaltyKind kind);
PenaltyKind penalty_kind_from_string(const std::string& s);

// ---------------------------------------------------------------------------
// Case inputs and Stage-I outputs
// ---------------------------------------------------------------------------

// One evaluation case: the narrative plus gold labels.
struct CaseRecord {
  std::string case_id;
  std::string fact_text;
  std::set<std::string> gold_articles;
  std::set<std::string> gold_charges;
  PenaltyTerm gold_penalty;
};

// Marker used when the extraction step could not find a factual element.
inline constexpr const char* kNotStated = "not stated";

// Structured judicial facts extracted by the Junior Judge.
struct JudicialFacts {
  std::string defendant_identification;
  std::string crime_details;
  std::string criminal_motive;

  // Canonical single-text form used wherever the facts are embedded or
  // compared as one document.
  std::string concatenated() const;

  bool operator==(const JudicialFacts&) const = default;
};

// Senior Judge's standardized case summary plus the consistency check result.
struct CaseSummary {
  std::string summary_text;
  double consistency_score = 0.0;  // in [0,1]
  std::vector<std::string> flagged_gaps;
};

// ---------------------------------------------------------------------------
// Retrieval artifacts
// ---------------------------------------------------------------------------

struct ScoredHit {
  std::string doc_id;
  double score = 0.0;

  bool operator==(const ScoredHit&) const = default;
};

// Stage-II output: ranked hits per knowledge base plus the concatenated
// case information document handed to later stages.
struct RetrievalBundle {
  std::vector<ScoredHit> law_hits;
  std::vector<ScoredHit> charge_hits;
  std::vector<ScoredHit> precedent_hits;
  std::string concatenated_document;
};

// ---------------------------------------------------------------------------
// Judgments, objections, appeals
// ---------------------------------------------------------------------------

struct Judgment {
  std::set<std::string> filtered_laws;
  std::string charge;
  PenaltyTerm term;

  bool operator==(const Judgment&) const = default;

  // Canonical human-readable rendering, used as scorer input.
  std::string to_text() const;
};

struct Objection {
  std::string claim_text;
  double diff_score = 0.0;  // divergence from the judgment, in [0,1]
  double sup_score = 0.0;   // support by the case text, in [0,1]
};

struct AppealItem {
  Objection objection;
  std::vector<std::pair<std::string, double>> supporting_laws;  // (article_id, fv)
  std::string contextual_argument;
};

struct AppealBrief {
  std::vector<AppealItem> items;

  // Single-text rendering used when the brief feeds retrieval or scoring.
  std::string to_text() const;
};

struct FinalJudgment {
  Judgment judgment;
  bool revised = false;
  double validity_score = 0.0;
  int instance_count = 1;  // 1 or 2
};

// ---------------------------------------------------------------------------
// Hyperparameters
// ---------------------------------------------------------------------------

enum class GammaScheme { Uniform, SimilarityWeighted };

std::string to_string(GammaScheme scheme);
GammaScheme gamma_scheme_from_string(const std::string& s);

// Every tunable knob of the pipeline, with artifact defaults. The two
// thresholds the source material overloads onto one symbol are split into
// theta_law (law filtering) and theta_val (appeal validity weighting).
struct Hyperparameters {
  double alpha = 0.5;      // sparse/dense mix for precedent retrieval
  double beta = 0.5;       // fact/precedent mix for charge selection
  GammaScheme gamma_scheme = GammaScheme::SimilarityWeighted;
  double delta_months = 2.0;  // months removed per mitigating factor
  double theta_law = 0.3;  // min match for a law to enter the judgment
  double tau = 0.5;        // objection validity threshold
  double eta = 0.5;        // law-support threshold for appeal items
  double theta_val = 0.5;  // factual vs legal weight in appeal validity
  double epsilon = 0.6;    // appeal acceptance threshold
  int top_k = 10;          // retrieval depth per knowledge base

  bool operator==(const Hyperparameters&) const = default;
};

// Returns h unchanged when every interval invariant holds; otherwise throws
// ValidationError naming the offending field.
const Hyperparameters& validate_hyperparameters(const Hyperparameters& h);

// ---------------------------------------------------------------------------
// Transcript
// ---------------------------------------------------------------------------

enum class Stage { I = 1, II = 2, III = 3, IV = 4, V = 5, VI = 6 };
enum class Role { JJ, SJ, Assistant, CJ, Defendant, LegalCounsel };

std::string to_string(Stage stage);
std::string to_string(Role role);
Stage stage_from_string(const std::string& s);
Role role_from_string(const std::string& s);

struct LlmCall {
  std::string prompt_digest;
  std::string response_digest;
  double temperature = 0.0;
  long long tokens = 0;
};

struct StageRecord {
  Stage stage = Stage::I;
  Role role = Role::JJ;
  std::string inputs_digest;
  std::string output_payload;               // canonical JSON text of the payload
  std::vector<LlmCall> llm_calls;
  std::vector<std::string> notes;           // warnings / flagged fallbacks
};

struct Transcript {
  std::string config_echo;  // canonical JSON of the run configuration
  std::vector<StageRecord> records;

  bool has_stage(Stage s) const;
  int count_stage(Stage s) const;
  long long total_llm_calls() const;
};

// ---------------------------------------------------------------------------
// JSON serialization (nlohmann ADL hooks)
// ---------------------------------------------------------------------------

void to_json(Json& j, const PenaltyTerm& t);
void from_json(const Json& j, PenaltyTerm& t);
void to_json(Json& j, const CaseRecord& c);
void from_json(const Json& j, CaseRecord& c);
void to_json(Json& j, const JudicialFacts& f);
void from_json(const Json& j, JudicialFacts& f);
void to_json(Json& j, const CaseSummary& s);
void from_json(const Json& j, CaseSummary& s);
void to_json(Json& j, const ScoredHit& h);
void from_json(const Json& j, ScoredHit& h);
void to_json(Json& j, const RetrievalBundle& b);
void from_json(const Json& j, RetrievalBundle& b);
void to_json(Json& j, const Judgment& g);
void from_json(const Json& j, Judgment& g);
void to_json(Json& j, const Objection& o);
void from_json(const Json& j, Objection& o);
void to_json(Json& j, const AppealItem& a);
void from_json(const Json& j, AppealItem& a);
void to_json(Json& j, const AppealBrief& a);
void from_json(const Json& j, AppealBrief& a);
void to_json(Json& j, const FinalJudgment& f);
void from_json(const Json& j, FinalJudgment& f);
void to_json(Json& j, const Hyperparameters& h);
void from_json(const Json& j, Hyperparameters& h);
void to_json(Json& j, const LlmCall& c);
void from_json(const Json& j, LlmCall& c);
void to_json(Json& j, const StageRecord& r);
void from_json(const Json& j, StageRecord& r);
void to_json(Json& j, const Transcript& t);
void from_json(const Json& j, Transcript& t);

// Loads a line-delimited JSON case dataset, validating non-empty facts and
// case_id uniqueness. Throws ParseError with the line number on bad input.
std::vector<CaseRecord> load_cases(const std::string& path);

}  // namespace juris
