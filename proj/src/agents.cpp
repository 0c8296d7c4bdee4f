#include "juris/agents.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "juris/digest.hpp"
#include "juris/errors.hpp"
#include "juris/retrieval.hpp"

namespace fs = std::filesystem;

namespace juris {

// ---------------------------------------------------------------------------
// PromptSet
// ---------------------------------------------------------------------------

namespace {

struct PromptFile {
  const char* name;
  Role role;
};

constexpr PromptFile kPromptFiles[] = {
    {"jj_extract", Role::JJ},
    {"sj_gaps", Role::SJ},
    {"sj_summarize", Role::SJ},
    {"cj_mitigating", Role::CJ},
    {"defendant_objections", Role::Defendant},
    {"counsel_argument", Role::LegalCounsel},
    {"cj_charge_direct", Role::CJ},
    {"cj_laws_direct", Role::CJ},
    {"cj_single", Role::CJ},
    {"scorer_diff", Role::CJ},
    {"scorer_sup", Role::CJ},
    {"scorer_fv", Role::LegalCounsel},
    {"scorer_valid", Role::CJ},
};

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read prompt file: " + path.string());
  std::string data((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return data;
}

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string to_lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

PromptSet PromptSet::load(const std::string& dir) {
  PromptSet set;
  const fs::path root(dir);
  set.version_ = trim(read_text_file(root / "VERSION"));
  if (set.version_.empty()) {
    throw ConfigError("prompt set VERSION file is empty in " + dir);
  }
  for (const auto& file : kPromptFiles) {
    const std::string raw = read_text_file(root / (std::string(file.name) + ".txt"));
    // sections separated by lines containing exactly "---"
    std::vector<std::string> sections(1);
    std::istringstream lines(raw);
    std::string line;
    while (std::getline(lines, line)) {
      if (trim(line) == "---") {
        sections.emplace_back();
      } else {
        auto& cur = sections.back();
        cur += line;
        cur += "\n";
      }
    }
    if (sections.size() < 2) {
      throw ConfigError(std::string("prompt ") + file.name +
                        " must contain a system and a user section");
    }
    RolePrompt prompt;
    prompt.role = file.role;
    prompt.name = file.name;
    prompt.system_text = trim(sections[0]);
    prompt.user_template = trim(sections[1]);
    if (sections.size() > 2) prompt.output_schema = trim(sections[2]);
    set.prompts_.emplace(prompt.name, std::move(prompt));
  }
  return set;
}

const RolePrompt& PromptSet::get(const std::string& name) const {
  auto it = prompts_.find(name);
  if (it == prompts_.end()) throw ConfigError("unknown prompt: " + name);
  return it->second;
}

std::string render_prompt(const std::string& tpl,
                          const std::map<std::string, std::string>& bindings) {
  std::string out;
  out.reserve(tpl.size());
  size_t i = 0;
  while (i < tpl.size()) {
    if (tpl[i] == '{') {
      size_t close = tpl.find('}', i + 1);
      if (close != std::string::npos) {
        const std::string name = tpl.substr(i + 1, close - i - 1);
        const bool word = !name.empty() &&
                          std::all_of(name.begin(), name.end(), [](unsigned char c) {
                            return std::islower(c) || c == '_';
                          });
        if (word) {
          auto it = bindings.find(name);
          if (it == bindings.end()) {
            throw ValidationError("unbound placeholder {" + name + "}");
          }
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out.push_back(tpl[i]);
    ++i;
  }
  // a binding value must not smuggle a placeholder back in
  for (size_t p = out.find('{'); p != std::string::npos; p = out.find('{', p + 1)) {
    size_t close = out.find('}', p + 1);
    if (close == std::string::npos) break;
    const std::string name = out.substr(p + 1, close - p - 1);
    if (!name.empty() && std::all_of(name.begin(), name.end(), [](unsigned char c) {
          return std::islower(c) || c == '_';
        })) {
      throw ValidationError("placeholder residue {" + name + "} after render");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Call logging
// ---------------------------------------------------------------------------

ChatResult tracked_chat(Backend& backend, const ChatRequest& req, CallLog& log) {
  ChatResult result = backend.chat(req);
  LlmCall call;
  call.prompt_digest = sha256_hex(req.system_text + "\n" + req.user_text);
  call.response_digest = sha256_hex(result.text);
  call.temperature = req.temperature;
  call.tokens = result.tokens;
  log.calls.push_back(std::move(call));
  log.tokens += result.tokens;
  return result;
}

// ---------------------------------------------------------------------------
// Structured output
// ---------------------------------------------------------------------------

namespace {

std::optional<Json> parse_quiet(const std::string& text) {
  Json j = Json::parse(text, nullptr, false);
  if (j.is_discarded()) return std::nullopt;
  return j;
}

std::string strip_code_fences(const std::string& text) {
  const size_t open = text.find("```");
  if (open == std::string::npos) return text;
  size_t body = text.find('\n', open);
  if (body == std::string::npos) return text;
  ++body;
  const size_t close = text.find("```", body);
  if (close == std::string::npos) return text;
  return text.substr(body, close - body);
}

std::optional<std::string> first_json_object(const std::string& text) {
  const size_t open = text.find('{');
  if (open == std::string::npos) return std::nullopt;
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  for (size_t i = open; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      if (--depth == 0) return text.substr(open, i - open + 1);
    }
  }
  return std::nullopt;
}

}  // namespace

std::optional<Json> try_extract_json(const std::string& text) {
  if (auto direct = parse_quiet(trim(text))) return direct;
  if (auto fenced = parse_quiet(trim(strip_code_fences(text)))) return fenced;
  if (auto object = first_json_object(text)) {
    if (auto parsed = parse_quiet(*object)) return parsed;
  }
  return std::nullopt;
}

Json structured_chat(Backend& backend, ChatRequest req,
                     const std::string& schema_hint, CallLog& log,
                     const JsonValidator& validate) {
  auto attempt = [&](const std::string& text) -> std::optional<Json> {
    auto parsed = try_extract_json(text);
    if (!parsed) return std::nullopt;
    if (validate) {
      if (auto problem = validate(*parsed)) return std::nullopt;
    }
    return parsed;
  };

  ChatResult first = tracked_chat(backend, req, log);
  if (auto parsed = attempt(first.text)) return *parsed;

  // one repair re-prompt with the schema restated
  ChatRequest repair = req;
  repair.user_text += "\n\nYour previous reply could not be parsed. Respond with "
                      "only a JSON object matching this schema:\n" +
                      schema_hint;
  ChatResult second = tracked_chat(backend, repair, log);
  if (auto parsed = attempt(second.text)) return *parsed;

  throw StageError("unparseable structured output for " + req.role_tag,
                   second.text);
}

// ---------------------------------------------------------------------------
// Agent operations
// ---------------------------------------------------------------------------

namespace {

ChatRequest make_request(const AgentContext& ctx, const RolePrompt& prompt,
                         const std::string& key,
                         const std::map<std::string, std::string>& bindings) {
  ChatRequest req;
  req.role_tag = to_string(prompt.role) + "/" +
                 prompt.name.substr(prompt.name.find('_') + 1) + "/" + key;
  req.system_text = prompt.system_text;
  req.user_text = render_prompt(prompt.user_template, bindings);
  req.temperature = 0.0;
  req.max_tokens = ctx.max_tokens;
  return req;
}

}  // namespace

JudicialFacts extract_facts(AgentContext& ctx, const std::string& case_text,
                            const std::string& key, CallLog& log) {
  const RolePrompt& prompt = ctx.prompts.get("jj_extract");
  ChatRequest req = make_request(ctx, prompt, key, {{"case_text", case_text}});
  Json parsed = structured_chat(ctx.backend, req, prompt.output_schema, log);

  JudicialFacts facts;
  auto field = [&](const char* name, std::string& into) {
    if (parsed.contains(name) && parsed[name].is_string() &&
        !parsed[name].get<std::string>().empty()) {
      into = parsed[name].get<std::string>();
    } else {
      into = kNotStated;
      log.notes.push_back(std::string("fact field missing: ") + name);
    }
  };
  field("defendant_identification", facts.defendant_identification);
  field("crime_details", facts.crime_details);
  field("criminal_motive", facts.criminal_motive);
  return facts;
}

ConsistencyCheck check_consistency(AgentContext& ctx, const std::string& case_text,
                                   const JudicialFacts& facts, const EmbedFn& embed,
                                   const std::string& key, CallLog& log) {
  ConsistencyCheck out;
  out.score = normalized_cosine(embed(case_text), embed(facts.concatenated()));

  try {
    const RolePrompt& prompt = ctx.prompts.get("sj_gaps");
    ChatRequest req = make_request(
        ctx, prompt, key,
        {{"case_text", case_text}, {"facts", facts.concatenated()}});
    Json parsed = structured_chat(ctx.backend, req, prompt.output_schema, log);
    if (parsed.contains("gaps") && parsed["gaps"].is_array()) {
      for (const auto& g : parsed["gaps"]) {
        if (g.is_string()) out.gaps.push_back(g.get<std::string>());
      }
    }
  } catch (const std::exception& e) {
    log.notes.push_back(std::string("gap listing failed: ") + e.what());
  }
  return out;
}

CaseSummary summarize_case(AgentContext& ctx, const std::string& case_text,
                           const JudicialFacts& facts,
                           const ConsistencyCheck& check, const std::string& key,
                           CallLog& log) {
  std::string gaps_text;
  for (const auto& g : check.gaps) gaps_text += "- " + g + "\n";
  if (gaps_text.empty()) gaps_text = "(none)";

  const RolePrompt& prompt = ctx.prompts.get("sj_summarize");
  ChatRequest req = make_request(ctx, prompt, key,
                                 {{"case_text", case_text},
                                  {"facts", facts.concatenated()},
                                  {"gaps", gaps_text}});
  ChatResult result = tracked_chat(ctx.backend, req, log);
  const std::string summary = trim(result.text);
  if (summary.empty()) {
    throw StageError("summarization returned an empty summary for " + key);
  }
  CaseSummary out;
  out.summary_text = summary;
  out.consistency_score = check.score;
  out.flagged_gaps = check.gaps;
  return out;
}

MitigatingFactors count_mitigating_factors(AgentContext& ctx,
                                           const std::string& case_text,
                                           const JudicialFacts& facts,
                                           const std::string& key, CallLog& log) {
  std::string vocabulary;
  for (const char* f : kMitigatingVocabulary) {
    vocabulary += std::string("- ") + f + "\n";
  }
  const RolePrompt& prompt = ctx.prompts.get("cj_mitigating");
  MitigatingFactors out;
  Json parsed;
  try {
    ChatRequest req = make_request(ctx, prompt, key,
                                   {{"case_text", case_text},
                                    {"facts", facts.concatenated()},
                                    {"vocabulary", vocabulary}});
    parsed = structured_chat(ctx.backend, req, prompt.output_schema, log);
  } catch (const std::exception& e) {
    log.notes.push_back(std::string("mitigating factor parse failed, M=0: ") +
                        e.what());
    return out;  // fail-conservative
  }
  std::set<std::string> seen;
  if (parsed.contains("factors") && parsed["factors"].is_array()) {
    for (const auto& f : parsed["factors"]) {
      if (!f.is_string()) continue;
      const std::string norm = to_lower(trim(f.get<std::string>()));
      const bool known =
          std::any_of(kMitigatingVocabulary.begin(), kMitigatingVocabulary.end(),
                      [&](const char* v) { return norm == v; });
      if (!known) {
        log.notes.push_back("ignored factor outside vocabulary: " +
                            f.get<std::string>());
        continue;
      }
      if (seen.insert(norm).second) out.matched.push_back(norm);
    }
  }
  out.count = static_cast<int>(out.matched.size());
  return out;
}

std::vector<std::string> generate_objections(AgentContext& ctx,
                                             const Judgment& judgment,
                                             const std::string& case_text,
                                             const std::string& key, CallLog& log) {
  std::vector<std::string> claims;
  try {
    const RolePrompt& prompt = ctx.prompts.get("defendant_objections");
    ChatRequest req = make_request(ctx, prompt, key,
                                   {{"judgment", judgment.to_text()},
                                    {"case_text", case_text}});
    Json parsed = structured_chat(ctx.backend, req, prompt.output_schema, log);
    if (parsed.contains("claims") && parsed["claims"].is_array()) {
      for (const auto& c : parsed["claims"]) {
        if (c.is_string() && !trim(c.get<std::string>()).empty()) {
          claims.push_back(trim(c.get<std::string>()));
        }
      }
    }
  } catch (const std::exception& e) {
    log.notes.push_back(std::string("objection generation failed, defendant "
                                    "accepts: ") +
                        e.what());
    return {};
  }
  if (claims.size() > kMaxObjections) {
    log.notes.push_back("objections truncated from " +
                        std::to_string(claims.size()) + " to " +
                        std::to_string(kMaxObjections));
    claims.resize(kMaxObjections);
  }
  return claims;
}

std::string contextual_argument(AgentContext& ctx, const Objection& objection,
                                const CaseSummary& summary, const std::string& key,
                                CallLog& log) {
  const RolePrompt& prompt = ctx.prompts.get("counsel_argument");
  const std::string summary_text =
      summary.summary_text.empty() ? "summary unavailable" : summary.summary_text;
  ChatRequest req = make_request(ctx, prompt, key,
                                 {{"objection", objection.claim_text},
                                  {"summary", summary_text}});
  ChatResult result = tracked_chat(ctx.backend, req, log);
  return trim(result.text);
}

ScorerVerdict llm_scorer(AgentContext& ctx, ScorerKind kind, const std::string& a,
                         const std::string& b, const std::string& key,
                         CallLog& log) {
  const char* name = kind == ScorerKind::Diff  ? "scorer_diff"
                     : kind == ScorerKind::Sup ? "scorer_sup"
                     : kind == ScorerKind::Fv  ? "scorer_fv"
                                               : "scorer_valid";
  const RolePrompt& prompt = ctx.prompts.get(name);
  ChatRequest req = make_request(ctx, prompt, key, {{"a", a}, {"b", b}});
  const JsonValidator numeric_score = [](const Json& j) -> std::optional<std::string> {
    if (!j.contains("score") || !j["score"].is_number()) {
      return "score must be numeric";
    }
    return std::nullopt;
  };
  Json parsed =
      structured_chat(ctx.backend, req, prompt.output_schema, log, numeric_score);
  ScorerVerdict verdict;
  verdict.score = parsed["score"].get<double>();
  if (parsed.contains("rationale") && parsed["rationale"].is_string()) {
    verdict.rationale = parsed["rationale"].get<std::string>();
  }
  if (verdict.score < 0.0 || verdict.score > 1.0) {
    log.notes.push_back("scorer score " + std::to_string(verdict.score) +
                        " clamped to [0,1]");
    verdict.score = std::clamp(verdict.score, 0.0, 1.0);
  }
  return verdict;
}

// ---------------------------------------------------------------------------
// Ablation prompts
// ---------------------------------------------------------------------------

std::string direct_charge(AgentContext& ctx, const CaseSummary& summary,
                          const ChargeKb& charges, const std::string& key,
                          CallLog& log) {
  std::string vocabulary;
  for (const auto& c : charges.entries) {
    vocabulary += c.charge_id + " (" + c.name + ")\n";
  }
  const RolePrompt& prompt = ctx.prompts.get("cj_charge_direct");
  ChatRequest req = make_request(ctx, prompt, key,
                                 {{"summary", summary.summary_text},
                                  {"vocabulary", vocabulary}});
  Json parsed = structured_chat(ctx.backend, req, prompt.output_schema, log);
  if (!parsed.contains("charge_id") || !parsed["charge_id"].is_string()) {
    throw StageError("direct charge reply lacks charge_id", parsed.dump());
  }
  const std::string charge = parsed["charge_id"].get<std::string>();
  if (!charges.find(charge)) {
    throw StageError("direct charge outside vocabulary: " + charge, parsed.dump());
  }
  return charge;
}

std::set<std::string> direct_laws(AgentContext& ctx, const CaseSummary& summary,
                                  const LawKb& laws, const std::string& key,
                                  CallLog& log) {
  const RolePrompt& prompt = ctx.prompts.get("cj_laws_direct");
  ChatRequest req =
      make_request(ctx, prompt, key, {{"summary", summary.summary_text}});
  Json parsed = structured_chat(ctx.backend, req, prompt.output_schema, log);
  std::set<std::string> out;
  if (parsed.contains("articles") && parsed["articles"].is_array()) {
    for (const auto& a : parsed["articles"]) {
      if (!a.is_string()) continue;
      const std::string id = a.get<std::string>();
      if (laws.find(id)) {
        out.insert(id);
      } else {
        log.notes.push_back("dropped unknown article id: " + id);
      }
    }
  }
  return out;
}

Judgment single_judgment(AgentContext& ctx, const std::string& case_text,
                         const std::string& info_document, const KbBundle& kb,
                         const std::string& key, CallLog& log) {
  const RolePrompt& prompt = ctx.prompts.get("cj_single");
  ChatRequest req = make_request(ctx, prompt, key,
                                 {{"case_text", case_text},
                                  {"documents", info_document.empty()
                                                    ? "(no retrieval available)"
                                                    : info_document}});
  Json parsed = structured_chat(ctx.backend, req, prompt.output_schema, log);

  Judgment judgment;
  try {
    judgment.term = parsed.at("penalty").get<PenaltyTerm>();
    judgment.charge = parsed.at("charge").get<std::string>();
  } catch (const std::exception& e) {
    throw StageError(std::string("single judgment reply malformed: ") + e.what(),
                     parsed.dump());
  }
  if (!kb.charges.find(judgment.charge)) {
    throw StageError("single judgment charge outside vocabulary: " + judgment.charge,
                     parsed.dump());
  }
  if (parsed.contains("articles") && parsed["articles"].is_array()) {
    for (const auto& a : parsed["articles"]) {
      if (!a.is_string()) continue;
      const std::string id = a.get<std::string>();
      if (kb.laws.find(id)) {
        judgment.filtered_laws.insert(id);
      } else {
        log.notes.push_back("dropped unknown article id: " + id);
      }
    }
  }
  return judgment;
}

}  // namespace juris
