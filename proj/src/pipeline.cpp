#include "juris/pipeline.hpp"

#include <nlohmann/json.hpp>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <memory>
#include <thread>

#include "juris/digest.hpp"
#include "juris/scoring.hpp"

namespace fs = std::filesystem;

namespace juris {

Json config_echo(const PipelineConfig& cfg) {
  return Json{{"hyperparameters", cfg.hyperparameters},
              {"backend_profile", cfg.backend_profile},
              {"kb_enabled", cfg.kb_enabled},
              {"multi_agent_enabled", cfg.multi_agent_enabled},
              {"prompt_set_version", cfg.prompt_set_version},
              {"bm25", {{"k1", cfg.retrieval.bm25_k1}, {"b", cfg.retrieval.bm25_b}}},
              {"max_tokens", cfg.max_tokens},
              {"use_llm_scorers", cfg.use_llm_scorers}};
}

Json outcome_to_json(const TrialOutcome& outcome) {
  return Json{{"case_id", outcome.case_id},
              {"final", outcome.final},
              {"first_instance", outcome.first_instance},
              {"transcript", outcome.transcript},
              {"token_usage", outcome.token_usage}};
}

namespace {

std::string digest_of(const Json& j) { return sha256_hex(j.dump()); }

void append_record(Transcript& transcript, Stage stage, Role role,
                   std::string inputs_digest, const Json& payload, CallLog log) {
  StageRecord record;
  record.stage = stage;
  record.role = role;
  record.inputs_digest = std::move(inputs_digest);
  record.output_payload = payload.dump();
  record.llm_calls = std::move(log.calls);
  record.notes = std::move(log.notes);
  transcript.records.push_back(std::move(record));
}

// Per-trial state shared by the first pass and the revise pass.
struct TrialRun {
  const CaseRecord& record;
  const IndexedKb& idx;
  const PipelineConfig& cfg;
  AgentContext ctx;
  EmbedFn embed;
  Transcript& transcript;

  TrialRun(const CaseRecord& record, const IndexedKb& idx, const PipelineConfig& cfg,
           Backend& backend, const PromptSet& prompts, Transcript& transcript)
      : record(record),
        idx(idx),
        cfg(cfg),
        ctx{backend, prompts, cfg.max_tokens},
        embed(embedder(backend)),
        transcript(transcript) {}

  // Pairwise scorers for Stages IV-VI: LLM-judged on the live profile,
  // deterministic embedding heuristics otherwise. `log` collects LLM calls
  // made by the scorers of one stage.
  ScorerSet scorers(CallLog& log) {
    if (!cfg.use_llm_scorers) return heuristic_scorers(embed);
    auto counter = std::make_shared<int>(0);
    auto make = [this, &log, counter](ScorerKind kind) -> PairScorer {
      return [this, &log, counter, kind](const std::string& a, const std::string& b) {
        const std::string key =
            record.case_id + ".s" + std::to_string((*counter)++);
        return llm_scorer(ctx, kind, a, b, key, log).score;
      };
    };
    ScorerSet set;
    set.diff = make(ScorerKind::Diff);
    set.sup = make(ScorerKind::Sup);
    set.fv = make(ScorerKind::Fv);
    set.valid = make(ScorerKind::Valid);
    return set;
  }

  struct StageOne {
    JudicialFacts facts;
    CaseSummary summary;
  };

  // Stage I: extraction, consistency check, summary. `case_text` may carry
  // supplementary context on the revise pass.
  StageOne stage_one(const std::string& case_text) {
    CallLog log;
    StageOne out;
    out.facts = extract_facts(ctx, case_text, record.case_id, log);
    const ConsistencyCheck check =
        check_consistency(ctx, case_text, out.facts, embed, record.case_id, log);
    out.summary =
        summarize_case(ctx, case_text, out.facts, check, record.case_id, log);
    append_record(transcript, Stage::I, Role::SJ, sha256_hex(case_text),
                  Json{{"facts", out.facts},
                       {"consistency_score", out.summary.consistency_score},
                       {"flagged_gaps", out.summary.flagged_gaps},
                       {"summary_text", out.summary.summary_text}},
                  std::move(log));
    return out;
  }

  // Stage II: retrieval over the three knowledge bases.
  RetrievalBundle stage_two(const CaseSummary& query) {
    RetrievalBundle bundle = retrieve_bundle(query, idx, cfg.hyperparameters,
                                             embed, cfg.retrieval);
    append_record(transcript, Stage::II, Role::Assistant,
                  sha256_hex(query.summary_text), Json(bundle), CallLog{});
    return bundle;
  }

  // Stage III: charge selection, sentencing, law filtering.
  Judgment stage_three(const JudicialFacts& facts, const CaseSummary& summary,
                       const RetrievalBundle& bundle) {
    const Hyperparameters& h = cfg.hyperparameters;
    CallLog log;
    Json payload;
    Judgment judgment;

    const MitigatingFactors mitigating =
        count_mitigating_factors(ctx, record.fact_text, facts, record.case_id, log);
    payload["mitigating"] =
        Json{{"count", mitigating.count}, {"matched", mitigating.matched}};

    if (cfg.kb_enabled) {
      const SelectedCharge selection =
          select_charge(bundle.charge_hits, facts, bundle.precedent_hits, idx.kb,
                        h.beta, embed);
      const ChargeDef* charge = idx.kb.charges.find(selection.charge_id);
      const SentencingBreakdown sentence = compute_sentence(
          *charge, bundle.precedent_hits, idx.kb.precedents, mitigating.count, h);
      const FilteredLaws laws =
          filter_laws(bundle.law_hits, idx.kb.laws, facts, h.theta_law, embed);
      if (laws.empty_warning) {
        log.notes.push_back("no law article met theta_law");
      }

      judgment.charge = selection.charge_id;
      judgment.term = PenaltyTerm::of_months(sentence.final_months);
      judgment.filtered_laws = laws.kept;

      Json candidates = Json::array();
      for (const auto& c : selection.candidates) {
        candidates.push_back(Json{{"charge_id", c.charge_id},
                                  {"fact_alignment", c.fact_alignment},
                                  {"precedent_alignment", c.precedent_alignment},
                                  {"combined", c.combined}});
      }
      Json matches = Json::array();
      for (const auto& [id, match] : laws.match_scores) {
        matches.push_back(Json{{"article_id", id}, {"match", match}});
      }
      payload["candidates"] = candidates;
      payload["law_matches"] = matches;
      payload["sentencing"] = Json{{"base_months", sentence.base_months},
                                   {"deviation_months", sentence.deviation_months},
                                   {"mitigating_count", sentence.mitigating_count},
                                   {"final_months", sentence.final_months}};
    } else {
      judgment.charge = direct_charge(ctx, summary, idx.kb.charges, record.case_id, log);
      judgment.filtered_laws =
          direct_laws(ctx, summary, idx.kb.laws, record.case_id, log);
      const ChargeDef* charge = idx.kb.charges.find(judgment.charge);
      const SentencingBreakdown sentence =
          compute_sentence(*charge, {}, idx.kb.precedents, mitigating.count, h);
      judgment.term = PenaltyTerm::of_months(sentence.final_months);
      payload["sentencing"] = Json{{"base_months", sentence.base_months},
                                   {"deviation_months", sentence.deviation_months},
                                   {"mitigating_count", sentence.mitigating_count},
                                   {"final_months", sentence.final_months}};
    }
    payload["judgment"] = judgment;
    append_record(transcript, Stage::III, Role::CJ,
                  digest_of(Json{{"facts", facts}, {"summary", summary.summary_text}}),
                  payload, std::move(log));
    return judgment;
  }

  // Single-prompt collapse of Stages I-III (multi-agent ablation).
  Judgment stage_three_collapsed(const RetrievalBundle& bundle) {
    CallLog log;
    Judgment judgment =
        single_judgment(ctx, record.fact_text, bundle.concatenated_document,
                        idx.kb, record.case_id, log);
    append_record(transcript, Stage::III, Role::CJ, sha256_hex(record.fact_text),
                  Json{{"judgment", judgment}}, std::move(log));
    return judgment;
  }
};

}  // namespace

FirstInstanceResult run_first_instance(const CaseRecord& record,
                                       const IndexedKb& idx,
                                       const PipelineConfig& cfg, Backend& backend,
                                       const PromptSet& prompts,
                                       Transcript& transcript) {
  validate_hyperparameters(cfg.hyperparameters);
  TrialRun run(record, idx, cfg, backend, prompts, transcript);
  FirstInstanceResult out;

  try {
    if (cfg.multi_agent_enabled) {
      TrialRun::StageOne one = run.stage_one(record.fact_text);
      out.facts = one.facts;
      out.summary = one.summary;
    } else {
      // the raw case text stands in for the summary as the retrieval query
      out.summary.summary_text = record.fact_text;
      out.summary.consistency_score = 1.0;
    }

    if (cfg.kb_enabled) {
      out.bundle = run.stage_two(out.summary);
    }

    out.judgment = cfg.multi_agent_enabled
                       ? run.stage_three(out.facts, out.summary, out.bundle)
                       : run.stage_three_collapsed(out.bundle);
  } catch (const TrialError&) {
    throw;
  } catch (const std::exception& e) {
    throw TrialError(e.what(), transcript);
  }
  return out;
}

TrialOutcome run_trial(const CaseRecord& record, const IndexedKb& idx,
                       const PipelineConfig& cfg, Backend& backend,
                       const PromptSet& prompts) {
  TrialOutcome outcome;
  outcome.case_id = record.case_id;
  outcome.transcript.config_echo = config_echo(cfg).dump();

  Transcript& transcript = outcome.transcript;
  const Hyperparameters& h = cfg.hyperparameters;
  TrialRun run(record, idx, cfg, backend, prompts, transcript);

  FirstInstanceResult first =
      run_first_instance(record, idx, cfg, backend, prompts, transcript);
  outcome.first_instance = first.judgment;

  if (!cfg.multi_agent_enabled) {
    // no agents, no objection round: the single-prompt judgment is final
    outcome.final = FinalJudgment{first.judgment, false, 0.0, 1};
    for (const auto& r : transcript.records) {
      for (const auto& c : r.llm_calls) outcome.token_usage += c.tokens;
    }
    return outcome;
  }

  try {
    // Stage IV: the defendant responds
    CallLog log4;
    const std::vector<std::string> claims =
        generate_objections(run.ctx, first.judgment, record.fact_text,
                            record.case_id, log4);
    const ScorerSet scorers4 = run.scorers(log4);
    std::vector<Objection> objections;
    Json rejected = Json::array();
    for (const auto& claim : claims) {
      ObjectionOutcome oc = validate_objection(claim, first.judgment,
                                               record.fact_text, h.tau, scorers4);
      if (oc.objection) {
        objections.push_back(*oc.objection);
      } else {
        rejected.push_back(Json{{"claim", claim},
                                {"reason", oc.rejection_reason},
                                {"diff_score", oc.diff_score},
                                {"sup_score", oc.sup_score}});
      }
    }
    append_record(transcript, Stage::IV, Role::Defendant,
                  sha256_hex(first.judgment.to_text()),
                  Json{{"claims", claims},
                       {"objections", objections},
                       {"rejected", rejected}},
                  std::move(log4));

    if (objections.empty()) {
      // acceptance concludes the case at the first instance
      FinalDecision decision =
          decide_final(first.judgment, std::nullopt, 0.0, h.epsilon, nullptr);
      outcome.final = decision.final;
    } else {
      // Stage V: appeal brief
      CallLog log5;
      const ScorerSet scorers5 = run.scorers(log5);
      auto arg_counter = std::make_shared<int>(0);
      ArgumentFn argument = [&run, &log5, arg_counter, &record](
                                const Objection& o, const CaseSummary& s) {
        const std::string key =
            record.case_id + ".o" + std::to_string((*arg_counter)++);
        return contextual_argument(run.ctx, o, s, key, log5);
      };
      AppealBuildResult appeal =
          build_appeal(objections, first.bundle.law_hits, idx.kb.laws,
                       first.summary, h.eta, scorers5, argument);
      for (auto& note : appeal.notes) log5.notes.push_back(note);
      append_record(transcript, Stage::V, Role::LegalCounsel,
                    digest_of(Json(objections)), Json{{"brief", appeal.brief}},
                    std::move(log5));

      // Stage VI: validity scoring and the final decision
      CallLog log6;
      const ScorerSet scorers6 = run.scorers(log6);
      ValidityResult validity =
          appeal_validity(appeal.brief, record.fact_text, first.bundle.law_hits,
                          idx.kb.laws, h.theta_val, scorers6);
      for (auto& note : validity.notes) log6.notes.push_back(note);
      const bool revise_triggered = validity.score >= h.epsilon;
      append_record(transcript, Stage::VI, Role::CJ,
                    digest_of(Json{{"brief", appeal.brief}}),
                    Json{{"validity_score", validity.score},
                         {"epsilon", h.epsilon},
                         {"revise_triggered", revise_triggered}},
                    std::move(log6));
      const size_t vi_index = transcript.records.size() - 1;

      // accepted appeals re-execute Stages I and II with the first-instance
      // judgment and the brief as supplementary inputs, then re-decide
      ReviseFn revise = [&run, &record, &cfg](const Judgment& j,
                                              const AppealBrief& a) -> Judgment {
        const std::string supplement = "\n\n[Supplementary context]\n"
                                       "First-instance judgment:\n" +
                                       j.to_text() + "\nAppeal brief:\n" +
                                       a.to_text();
        TrialRun::StageOne redo = run.stage_one(record.fact_text + supplement);
        RetrievalBundle bundle;
        if (cfg.kb_enabled) {
          CaseSummary query = redo.summary;
          query.summary_text += "\n" + a.to_text();
          bundle = run.stage_two(query);
        }
        return run.stage_three(redo.facts, redo.summary, bundle);
      };
      FinalDecision decision = decide_final(first.judgment, appeal.brief,
                                            validity.score, h.epsilon, revise);
      if (!decision.note.empty()) {
        transcript.records[vi_index].notes.push_back(decision.note);
      }
      outcome.final = decision.final;
    }
  } catch (const TrialError&) {
    throw;
  } catch (const std::exception& e) {
    throw TrialError(e.what(), transcript);
  }

  outcome.token_usage = 0;
  for (const auto& r : transcript.records) {
    for (const auto& c : r.llm_calls) outcome.token_usage += c.tokens;
  }
  return outcome;
}

std::vector<CaseResult> run_batch(const std::vector<CaseRecord>& cases,
                                  const IndexedKb& idx, const PipelineConfig& cfg,
                                  Backend& backend, const PromptSet& prompts,
                                  int parallelism) {
  if (parallelism < 1) throw ValidationError("parallelism must be >= 1");
  std::vector<CaseResult> results(cases.size());

  auto run_one = [&](size_t i) {
    results[i].case_id = cases[i].case_id;
    try {
      results[i].outcome = run_trial(cases[i], idx, cfg, backend, prompts);
    } catch (const TrialError& e) {
      results[i].error = e.what();
      results[i].partial = e.partial;
    } catch (const std::exception& e) {
      results[i].error = e.what();
    }
  };

  if (parallelism == 1 || cases.size() <= 1) {
    for (size_t i = 0; i < cases.size(); ++i) run_one(i);
    return results;
  }

  std::atomic<size_t> next{0};
  const int workers = std::min<int>(parallelism, static_cast<int>(cases.size()));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      while (true) {
        const size_t i = next.fetch_add(1);
        if (i >= cases.size()) return;
        run_one(i);
      }
    });
  }
  for (auto& t : pool) t.join();
  return results;
}

void write_run_outputs(const std::string& out_dir,
                       const std::vector<CaseResult>& results,
                       const PipelineConfig& cfg) {
  fs::create_directories(out_dir);
  Json manifest_cases = Json::array();
  long long total_tokens = 0;
  int failures = 0;
  for (const auto& r : results) {
    Json entry{{"case_id", r.case_id}};
    if (r.outcome) {
      entry["ok"] = true;
      entry["tokens"] = r.outcome->token_usage;
      total_tokens += r.outcome->token_usage;
      std::ofstream out(fs::path(out_dir) / (r.case_id + ".json"),
                        std::ios::trunc);
      out << outcome_to_json(*r.outcome).dump(2) << "\n";
    } else {
      entry["ok"] = false;
      entry["error"] = r.error;
      ++failures;
      Json failed{{"case_id", r.case_id},
                  {"error", r.error},
                  {"transcript", r.partial}};
      std::ofstream out(fs::path(out_dir) / (r.case_id + ".error.json"),
                        std::ios::trunc);
      out << failed.dump(2) << "\n";
    }
    manifest_cases.push_back(std::move(entry));
  }
  Json manifest{{"config", config_echo(cfg)},
                {"prompt_set_version", cfg.prompt_set_version},
                {"cases", manifest_cases},
                {"total_tokens", total_tokens},
                {"failures", failures}};
  std::ofstream out(fs::path(out_dir) / "manifest.json", std::ios::trunc);
  out << manifest.dump(2) << "\n";
}

}  // namespace juris
