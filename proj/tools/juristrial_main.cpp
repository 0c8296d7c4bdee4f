// juristrial: retrieval-augmented multi-agent adjudication engine.
//
// Subcommands:
//   ingest  build and persist the knowledge-base indexes
//   run     run a single case through the six-stage trial pipeline
//   eval    run a dataset and score law/charge/penalty predictions

#include <CLI11.hpp>

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "juris/agents.hpp"
#include "juris/errors.hpp"
#include "juris/gateway.hpp"
#include "juris/kb.hpp"
#include "juris/metrics.hpp"
#include "juris/pipeline.hpp"
#include "juris/run_config.hpp"

namespace fs = std::filesystem;
using namespace juris;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct StageLabel {
  Stage stage;
  const char* label;
};

constexpr StageLabel kStageLabels[] = {
    {Stage::I, "Stage I - Information Extraction"},
    {Stage::II, "Stage II - Legal Information Retrieval"},
    {Stage::III, "Stage III - First-instance Decision"},
    {Stage::IV, "Stage IV - Defendant's Response"},
    {Stage::V, "Stage V - Appeal Submission"},
    {Stage::VI, "Stage VI - Second-instance Review"},
};

const char* stage_label(Stage s) {
  for (const auto& entry : kStageLabels) {
    if (entry.stage == s) return entry.label;
  }
  return "Stage ?";
}

void write_stage_log(const fs::path& path, const TrialOutcome& outcome) {
  std::ofstream out(path, std::ios::trunc);
  out << "case " << outcome.case_id << "\n";
  for (const auto& record : outcome.transcript.records) {
    out << stage_label(record.stage) << " [" << to_string(record.role) << "]"
        << "  llm_calls=" << record.llm_calls.size() << "\n";
    for (const auto& note : record.notes) {
      out << "  note: " << note << "\n";
    }
  }
  const auto& fj = outcome.final;
  out << "instances: " << fj.instance_count << (fj.revised ? " (revised)" : "")
      << "\n";
  out << "final charge: " << fj.judgment.charge << "\n";
  out << "final term: ";
  if (fj.judgment.term.kind == PenaltyKind::Months) {
    out << fj.judgment.term.months << " months\n";
  } else {
    out << to_string(fj.judgment.term.kind) << "\n";
  }
  out << "final laws:";
  for (const auto& id : fj.judgment.filtered_laws) out << " " << id;
  out << "\ntokens: " << outcome.token_usage << "\n";
}

int cmd_ingest(const std::string& laws, const std::string& charges,
               const std::string& precedents, const std::string& out_dir,
               const std::string& config_path, bool force) {
  AppConfig config;
  if (!config_path.empty()) config = load_app_config(config_path);
  if (index_exists(out_dir) && !force) {
    std::cerr << "index already exists in " << out_dir
              << "; pass --force to rebuild\n";
    return kExitUsage;
  }
  // the mock profile embeds locally; only live ingestion needs a backend
  BatchEmbedFn embed;
  std::unique_ptr<Backend> backend;
  if (config.profile == "mock") {
    embed = [](const std::vector<std::string>& texts) {
      std::vector<Embedding> out;
      out.reserve(texts.size());
      for (const auto& t : texts) out.push_back(hashed_embedding(t));
      return out;
    };
  } else {
    backend = make_backend(config);
    embed = batch_embedder(*backend);
  }
  KbBundle kb = load_kb(laws, charges, precedents);
  IndexedKb idx = build_indexes(std::move(kb), embed);
  persist_index(idx, out_dir);
  std::cout << "laws=" << idx.kb.laws.size() << " charges=" << idx.kb.charges.size()
            << " precedents=" << idx.kb.precedents.size() << "\n";
  std::cout << "index written to " << out_dir << "\n";
  return kExitOk;
}

int cmd_run(const std::string& case_id, const std::string& config_path,
            const std::string& kb_dir, const std::string& out_dir,
            const std::string& ablate, const std::vector<std::string>& overrides) {
  AppConfig config = load_app_config(config_path);
  for (const auto& o : overrides) apply_override(config, o);
  if (config.dataset.empty()) throw ConfigError("config has no dataset path");

  const std::vector<CaseRecord> cases = load_cases(config.dataset);
  const CaseRecord* record = nullptr;
  for (const auto& c : cases) {
    if (c.case_id == case_id) record = &c;
  }
  if (!record) throw ConfigError("unknown case id: " + case_id);

  IndexedKb idx = load_index(kb_dir);
  PromptSet prompts = PromptSet::load(config.prompts_dir);
  auto backend = make_backend(config);
  PipelineConfig cfg =
      pipeline_config(config, prompts.version(), ablate == "kb", ablate == "ma");

  fs::create_directories(out_dir);
  try {
    TrialOutcome outcome = run_trial(*record, idx, cfg, *backend, prompts);
    std::ofstream out(fs::path(out_dir) / (case_id + ".json"), std::ios::trunc);
    out << outcome_to_json(outcome).dump(2) << "\n";
    write_stage_log(fs::path(out_dir) / (case_id + ".log"), outcome);
    std::cout << "case " << case_id << ": instance_count="
              << outcome.final.instance_count << " charge="
              << outcome.final.judgment.charge << "\n";
    return kExitOk;
  } catch (const TrialError& e) {
    Json failed{{"case_id", case_id},
                {"error", e.what()},
                {"transcript", e.partial}};
    std::ofstream out(fs::path(out_dir) / (case_id + ".error.json"),
                      std::ios::trunc);
    out << failed.dump(2) << "\n";
    std::cerr << "trial failed: " << e.what() << "\n";
    return kExitRuntime;
  }
}

int cmd_eval(const std::string& dataset, const std::string& config_path,
             const std::string& kb_dir, const std::string& out_dir,
             int parallelism, const std::string& ablate,
             const std::vector<std::string>& overrides) {
  AppConfig config = load_app_config(config_path);
  for (const auto& o : overrides) apply_override(config, o);
  if (!dataset.empty()) config.dataset = dataset;
  if (config.dataset.empty()) throw ConfigError("no dataset given");
  if (parallelism > 0) config.parallelism = parallelism;

  const std::vector<CaseRecord> cases = load_cases(config.dataset);
  IndexedKb idx = load_index(kb_dir);
  PromptSet prompts = PromptSet::load(config.prompts_dir);
  auto backend = make_backend(config);
  PipelineConfig cfg =
      pipeline_config(config, prompts.version(), ablate == "kb", ablate == "ma");

  const std::vector<CaseResult> results =
      run_batch(cases, idx, cfg, *backend, prompts, config.parallelism);
  write_run_outputs(out_dir, results, cfg);

  std::vector<TrialOutcome> outcomes;
  for (const auto& r : results) {
    if (r.outcome) outcomes.push_back(*r.outcome);
    else std::cerr << "case " << r.case_id << " failed: " << r.error << "\n";
  }
  EvalConfig eval_config{config.penalty_edges, config.t_max_months};
  MetricsReport report = evaluate_run(outcomes, cases, eval_config);

  std::ofstream json_out(fs::path(out_dir) / "metrics.json", std::ios::trunc);
  json_out << report.to_json().dump(2) << "\n";
  std::ofstream table_out(fs::path(out_dir) / "metrics.txt", std::ios::trunc);
  table_out << report.to_table();
  std::cout << report.to_table();
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"retrieval-augmented multi-agent trial pipeline"};
  app.require_subcommand(1);

  std::string laws, charges, precedents, out_dir, config_path;
  bool force = false;
  CLI::App* ingest = app.add_subcommand("ingest", "build the KB indexes");
  ingest->add_option("--laws", laws, "law articles JSONL")->required();
  ingest->add_option("--charges", charges, "charge definitions JSONL")->required();
  ingest->add_option("--precedents", precedents, "precedents JSONL")->required();
  ingest->add_option("--out", out_dir, "index output directory")->required();
  ingest->add_option("--config", config_path, "run config (for live embeddings)");
  ingest->add_flag("--force", force, "rebuild over an existing index");

  std::string case_id, run_config_path, kb_dir, run_out, ablate;
  std::vector<std::string> overrides;
  CLI::App* run = app.add_subcommand("run", "run one case");
  run->add_option("--case-id", case_id, "case to run")->required();
  run->add_option("--config", run_config_path, "run config file")->required();
  run->add_option("--kb", kb_dir, "persisted index directory")->required();
  run->add_option("--out", run_out, "output directory")->required();
  run->add_option("--ablate", ablate, "ablation switch: kb or ma")
      ->check(CLI::IsMember({"kb", "ma"}));
  run->add_option("--set", overrides, "config override key=value");

  std::string eval_dataset, eval_config_path, eval_kb, eval_out, eval_ablate;
  std::vector<std::string> eval_overrides;
  int parallelism = 0;
  CLI::App* eval = app.add_subcommand("eval", "run and score a dataset");
  eval->add_option("--dataset", eval_dataset, "case dataset JSONL");
  eval->add_option("--config", eval_config_path, "run config file")->required();
  eval->add_option("--kb", eval_kb, "persisted index directory")->required();
  eval->add_option("--out", eval_out, "output directory")->required();
  eval->add_option("--parallelism", parallelism, "worker count");
  eval->add_option("--ablate", eval_ablate, "ablation switch: kb or ma")
      ->check(CLI::IsMember({"kb", "ma"}));
  eval->add_option("--set", eval_overrides, "config override key=value");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (ingest->parsed()) {
      return cmd_ingest(laws, charges, precedents, out_dir, config_path, force);
    }
    if (run->parsed()) {
      return cmd_run(case_id, run_config_path, kb_dir, run_out, ablate, overrides);
    }
    if (eval->parsed()) {
      return cmd_eval(eval_dataset, eval_config_path, eval_kb, eval_out,
                      parallelism, eval_ablate, eval_overrides);
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
