#pragma once

#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "juris/domain.hpp"
#include "juris/embedding.hpp"
#include "juris/gateway.hpp"
#include "juris/kb.hpp"

namespace juris {

// ---------------------------------------------------------------------------
// Prompt resources
// ---------------------------------------------------------------------------

// One prompt resource: system text, a user template with {name} placeholders,
// and an optional schema hint restated during structured-output repair.
struct RolePrompt {
  Role role = Role::JJ;
  std::string name;
  std::string system_text;
  std::string user_template;
  std::string output_schema;
};

// Versioned prompt set loaded from a directory of plain-text files
// (sections separated by "---" lines: system / user template / schema).
class PromptSet {
 public:
  static PromptSet load(const std::string& dir);

  const RolePrompt& get(const std::string& name) const;
  const std::string& version() const { return version_; }

 private:
  std::map<std::string, RolePrompt> prompts_;
  std::string version_;
};

// Substitutes {name} placeholders. Throws ValidationError when a referenced
// placeholder is missing from the bindings or when any `{word}` residue
// survives rendering.
std::string render_prompt(const std::string& tpl,
                          const std::map<std::string, std::string>& bindings);

// ---------------------------------------------------------------------------
// Call logging
// ---------------------------------------------------------------------------

// Accumulates the LLM calls made while executing one pipeline stage.
struct CallLog {
  std::vector<LlmCall> calls;
  std::vector<std::string> notes;
  long long tokens = 0;
};

// Issues the chat call and records prompt/response digests, temperature, and
// token usage.
ChatResult tracked_chat(Backend& backend, const ChatRequest& req, CallLog& log);

// ---------------------------------------------------------------------------
// Structured output
// ---------------------------------------------------------------------------

// Lenient extraction: direct parse, then code-fence stripping, then the
// first balanced JSON object found in the text.
std::optional<Json> try_extract_json(const std::string& text);

// Accepts a parsed object or returns a description of what is wrong with it,
// which triggers the repair re-prompt.
using JsonValidator = std::function<std::optional<std::string>(const Json&)>;

// Full repair protocol: extract and validate; on failure re-prompt once with
// the schema restated; still failing -> StageError preserving the raw
// response.
Json structured_chat(Backend& backend, ChatRequest req,
                     const std::string& schema_hint, CallLog& log,
                     const JsonValidator& validate = nullptr);

// ---------------------------------------------------------------------------
// Agent operations
// ---------------------------------------------------------------------------

struct AgentContext {
  Backend& backend;
  const PromptSet& prompts;
  int max_tokens = 2048;
};

// Stage I, Junior Judge: three-field fact extraction. Missing fields fall
// back to the "not stated" marker and are flagged in the log.
JudicialFacts extract_facts(AgentContext& ctx, const std::string& case_text,
                            const std::string& key, CallLog& log);

struct ConsistencyCheck {
  double score = 0.0;  // normalized cosine of case text vs facts
  std::vector<std::string> gaps;
};

// Stage I, Senior Judge: deterministic consistency score plus an LLM pass
// listing missing timeline/evidence links. An LLM failure leaves the gap
// list empty with a warning; the score is always computed.
ConsistencyCheck check_consistency(AgentContext& ctx, const std::string& case_text,
                                   const JudicialFacts& facts, const EmbedFn& embed,
                                   const std::string& key, CallLog& log);

// Stage I, Senior Judge: standardized case summary. Empty summary -> StageError.
CaseSummary summarize_case(AgentContext& ctx, const std::string& case_text,
                           const JudicialFacts& facts,
                           const ConsistencyCheck& check, const std::string& key,
                           CallLog& log);

// The closed vocabulary mitigating factors are matched against.
inline constexpr std::array<const char*, 6> kMitigatingVocabulary = {
    "surrender",     "confession",    "restitution",
    "minor role",    "first offense", "victim forgiveness"};

struct MitigatingFactors {
  int count = 0;  // distinct matched factors
  std::vector<std::string> matched;
};

// Stage III: enumerates mitigating factors from the closed vocabulary.
// Unmatched factors are ignored and logged; a parse failure yields count 0
// with a warning.
MitigatingFactors count_mitigating_factors(AgentContext& ctx,
                                           const std::string& case_text,
                                           const JudicialFacts& facts,
                                           const std::string& key, CallLog& log);

inline constexpr int kMaxObjections = 3;

// Stage IV, Defendant: 0..3 raw claims; surplus claims are truncated with a
// log entry; a backend failure yields an empty list (silence = acceptance).
std::vector<std::string> generate_objections(AgentContext& ctx,
                                             const Judgment& judgment,
                                             const std::string& case_text,
                                             const std::string& key, CallLog& log);

// Stage V, Legal Counsel: argument paragraph for one objection. An empty
// summary renders with a "summary unavailable" sentinel.
std::string contextual_argument(AgentContext& ctx, const Objection& objection,
                                const CaseSummary& summary, const std::string& key,
                                CallLog& log);

enum class ScorerKind { Diff, Sup, Fv, Valid };

struct ScorerVerdict {
  double score = 0.0;
  std::string rationale;
};

// LLM-judged pairwise scorer. Out-of-range scores clamp to [0,1] with a
// warning; a non-numeric score after repair is an error.
ScorerVerdict llm_scorer(AgentContext& ctx, ScorerKind kind, const std::string& a,
                         const std::string& b, const std::string& key, CallLog& log);

// ---------------------------------------------------------------------------
// Ablation prompts
// ---------------------------------------------------------------------------

// Knowledge-base-less charge selection: one prompt constrained to the charge
// vocabulary. Unknown charge in the reply -> StageError.
std::string direct_charge(AgentContext& ctx, const CaseSummary& summary,
                          const ChargeKb& charges, const std::string& key,
                          CallLog& log);

// Knowledge-base-less law citation. Unknown article ids are dropped with a
// log entry.
std::set<std::string> direct_laws(AgentContext& ctx, const CaseSummary& summary,
                                  const LawKb& laws, const std::string& key,
                                  CallLog& log);

// Single-prompt collapse of Stages I-III: the reply carries the whole
// judgment. Unknown charge -> StageError; unknown articles dropped with a
// log entry.
Judgment single_judgment(AgentContext& ctx, const std::string& case_text,
                         const std::string& info_document, const KbBundle& kb,
                         const std::string& key, CallLog& log);

}  // namespace juris
