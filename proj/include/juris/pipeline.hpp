#pragma once

#include <optional>
#include <string>
#include <vector>

#include "juris/agents.hpp"
#include "juris/domain.hpp"
#include "juris/gateway.hpp"
#include "juris/kb.hpp"
#include "juris/retrieval.hpp"

namespace juris {

struct PipelineConfig {
  Hyperparameters hyperparameters;
  std::string backend_profile = "mock";
  bool kb_enabled = true;          // false = run without retrieval
  bool multi_agent_enabled = true; // false = single-prompt first instance
  std::string prompt_set_version;
  RetrievalParams retrieval;
  int max_tokens = 2048;
  bool use_llm_scorers = false;  // live profile judges with LLM scorers
};

Json config_echo(const PipelineConfig& cfg);

struct TrialOutcome {
  std::string case_id;
  FinalJudgment final;
  Judgment first_instance;
  Transcript transcript;
  long long token_usage = 0;
};

Json outcome_to_json(const TrialOutcome& outcome);

// Raised when a stage aborts a trial; carries every completed stage record.
struct TrialError : Error {
  TrialError(const std::string& what, Transcript partial)
      : Error(what), partial(std::move(partial)) {}
  Transcript partial;
};

struct FirstInstanceResult {
  Judgment judgment;
  JudicialFacts facts;
  CaseSummary summary;
  RetrievalBundle bundle;
};

// Stages I-III. Appends stage records to `transcript`; throws TrialError on
// a stage failure.
FirstInstanceResult run_first_instance(const CaseRecord& record,
                                       const IndexedKb& idx,
                                       const PipelineConfig& cfg, Backend& backend,
                                       const PromptSet& prompts,
                                       Transcript& transcript);

// The full two-instance trial: first instance, objection round, and at most
// one appeal cycle whose acceptance re-executes Stages I and II before the
// revised decision.
TrialOutcome run_trial(const CaseRecord& record, const IndexedKb& idx,
                       const PipelineConfig& cfg, Backend& backend,
                       const PromptSet& prompts);

struct CaseResult {
  std::string case_id;
  std::optional<TrialOutcome> outcome;
  std::string error;    // set iff the trial aborted
  Transcript partial;   // completed stages of a failed trial
};

// Runs every case, isolating per-case failures; results are in input order
// regardless of completion order.
std::vector<CaseResult> run_batch(const std::vector<CaseRecord>& cases,
                                  const IndexedKb& idx, const PipelineConfig& cfg,
                                  Backend& backend, const PromptSet& prompts,
                                  int parallelism);

// Writes one <case_id>.json per case plus manifest.json (config echo, prompt
// set version, per-case token usage and failures).
void write_run_outputs(const std::string& out_dir,
                       const std::vector<CaseResult>& results,
                       const PipelineConfig& cfg);

}  // namespace juris
