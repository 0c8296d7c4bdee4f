#pragma once

#include <memory>
#include <string>
#include <vector>

#include "juris/domain.hpp"
#include "juris/gateway.hpp"
#include "juris/metrics.hpp"
#include "juris/pipeline.hpp"

namespace juris {

// The single declarative run configuration: hyperparameters, backend
// profile, paths, and evaluation settings. Relative paths resolve against
// the config file's directory.
struct AppConfig {
  Hyperparameters hyperparameters;
  std::string profile = "mock";  // "mock" or "live"
  std::string fixtures_dir;      // mock profile fixture set
  std::string prompts_dir;
  std::string dataset;
  std::string laws_path;
  std::string charges_path;
  std::string precedents_path;
  double bm25_k1 = 1.2;
  double bm25_b = 0.75;
  std::vector<int> penalty_edges = kDefaultPenaltyEdges;
  int t_max_months = 300;
  int max_tokens = 2048;
  int parallelism = 1;
};

AppConfig load_app_config(const std::string& path);

// Applies one `key=value` override; the key must name an existing config
// field (dotted for nested, e.g. hyperparameters.alpha). Unknown keys are
// ConfigErrors.
void apply_override(AppConfig& config, const std::string& assignment);

// Constructs the backend for the configured profile. The mock profile
// requires a fixture directory; the live profile reads its environment
// before any network activity.
std::unique_ptr<Backend> make_backend(const AppConfig& config);

// Pipeline configuration derived from the app config and ablation switches.
PipelineConfig pipeline_config(const AppConfig& config,
                               const std::string& prompt_set_version,
                               bool ablate_kb, bool ablate_ma);

}  // namespace juris
