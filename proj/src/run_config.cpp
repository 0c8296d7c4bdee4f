#include "juris/run_config.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>

#include "juris/errors.hpp"

namespace fs = std::filesystem;

namespace juris {

namespace {

std::string resolve_against(const fs::path& base, const std::string& path) {
  if (path.empty()) return path;
  fs::path p(path);
  if (p.is_absolute()) return p.string();
  return (base / p).lexically_normal().string();
}

}  // namespace

AppConfig load_app_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const std::exception& e) {
    throw ConfigError("bad config file " + path + ": " + e.what());
  }

  AppConfig config;
  try {
    if (j.contains("hyperparameters")) {
      j.at("hyperparameters").get_to(config.hyperparameters);
    }
    config.profile = j.value("profile", config.profile);
    config.fixtures_dir = j.value("fixtures_dir", config.fixtures_dir);
    config.prompts_dir = j.value("prompts_dir", config.prompts_dir);
    config.dataset = j.value("dataset", config.dataset);
    if (j.contains("kb")) {
      const Json& kb = j.at("kb");
      config.laws_path = kb.value("laws", config.laws_path);
      config.charges_path = kb.value("charges", config.charges_path);
      config.precedents_path = kb.value("precedents", config.precedents_path);
    }
    if (j.contains("bm25")) {
      config.bm25_k1 = j["bm25"].value("k1", config.bm25_k1);
      config.bm25_b = j["bm25"].value("b", config.bm25_b);
    }
    if (j.contains("penalty_edges")) {
      j.at("penalty_edges").get_to(config.penalty_edges);
    }
    config.t_max_months = j.value("t_max_months", config.t_max_months);
    config.max_tokens = j.value("max_tokens", config.max_tokens);
    config.parallelism = j.value("parallelism", config.parallelism);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError("bad config file " + path + ": " + e.what());
  }

  if (config.profile != "mock" && config.profile != "live") {
    throw ConfigError("profile must be 'mock' or 'live', got " + config.profile);
  }
  try {
    validate_hyperparameters(config.hyperparameters);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("bad hyperparameters: ") + e.what());
  }

  const fs::path base = fs::path(path).parent_path();
  config.fixtures_dir = resolve_against(base, config.fixtures_dir);
  config.prompts_dir = resolve_against(base, config.prompts_dir);
  config.dataset = resolve_against(base, config.dataset);
  config.laws_path = resolve_against(base, config.laws_path);
  config.charges_path = resolve_against(base, config.charges_path);
  config.precedents_path = resolve_against(base, config.precedents_path);
  return config;
}

void apply_override(AppConfig& config, const std::string& assignment) {
  const size_t eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw ConfigError("override must be key=value: " + assignment);
  }
  const std::string key = assignment.substr(0, eq);
  const std::string value = assignment.substr(eq + 1);

  auto as_double = [&](const std::string& v) {
    try {
      return std::stod(v);
    } catch (const std::exception&) {
      throw ConfigError("override " + key + " needs a number, got " + v);
    }
  };
  auto as_int = [&](const std::string& v) {
    try {
      return std::stoi(v);
    } catch (const std::exception&) {
      throw ConfigError("override " + key + " needs an integer, got " + v);
    }
  };

  Hyperparameters& h = config.hyperparameters;
  if (key == "profile") {
    if (value != "mock" && value != "live") {
      throw ConfigError("profile must be 'mock' or 'live'");
    }
    config.profile = value;
  } else if (key == "fixtures_dir") {
    config.fixtures_dir = value;
  } else if (key == "prompts_dir") {
    config.prompts_dir = value;
  } else if (key == "dataset") {
    config.dataset = value;
  } else if (key == "bm25.k1") {
    config.bm25_k1 = as_double(value);
  } else if (key == "bm25.b") {
    config.bm25_b = as_double(value);
  } else if (key == "t_max_months") {
    config.t_max_months = as_int(value);
  } else if (key == "max_tokens") {
    config.max_tokens = as_int(value);
  } else if (key == "parallelism") {
    config.parallelism = as_int(value);
  } else if (key == "hyperparameters.alpha") {
    h.alpha = as_double(value);
  } else if (key == "hyperparameters.beta") {
    h.beta = as_double(value);
  } else if (key == "hyperparameters.gamma_scheme") {
    try {
      h.gamma_scheme = gamma_scheme_from_string(value);
    } catch (const std::exception& e) {
      throw ConfigError(e.what());
    }
  } else if (key == "hyperparameters.delta_months") {
    h.delta_months = as_double(value);
  } else if (key == "hyperparameters.theta_law") {
    h.theta_law = as_double(value);
  } else if (key == "hyperparameters.tau") {
    h.tau = as_double(value);
  } else if (key == "hyperparameters.eta") {
    h.eta = as_double(value);
  } else if (key == "hyperparameters.theta_val") {
    h.theta_val = as_double(value);
  } else if (key == "hyperparameters.epsilon") {
    h.epsilon = as_double(value);
  } else if (key == "hyperparameters.top_k") {
    h.top_k = as_int(value);
  } else {
    throw ConfigError("unknown config key: " + key);
  }
  try {
    validate_hyperparameters(config.hyperparameters);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("bad hyperparameters: ") + e.what());
  }
}

std::unique_ptr<Backend> make_backend(const AppConfig& config) {
  if (config.profile == "mock") {
    if (config.fixtures_dir.empty()) {
      throw ConfigError("mock profile requires fixtures_dir");
    }
    return std::make_unique<MockBackend>(config.fixtures_dir);
  }
  return std::make_unique<LiveBackend>(LiveOptions::from_env());
}

PipelineConfig pipeline_config(const AppConfig& config,
                               const std::string& prompt_set_version,
                               bool ablate_kb, bool ablate_ma) {
  PipelineConfig cfg;
  cfg.hyperparameters = config.hyperparameters;
  cfg.backend_profile = config.profile;
  cfg.kb_enabled = !ablate_kb;
  cfg.multi_agent_enabled = !ablate_ma;
  cfg.prompt_set_version = prompt_set_version;
  cfg.retrieval.bm25_k1 = config.bm25_k1;
  cfg.retrieval.bm25_b = config.bm25_b;
  cfg.max_tokens = config.max_tokens;
  cfg.use_llm_scorers = config.profile == "live";
  return cfg;
}

}  // namespace juris
