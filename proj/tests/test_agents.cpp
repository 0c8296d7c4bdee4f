#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>

#include "juris/agents.hpp"
#include "juris/errors.hpp"
#include "juris/gateway.hpp"

namespace fs = std::filesystem;
using namespace juris;

namespace {

const std::string kPromptsDir = JURIS_PROMPTS_DIR;

struct FixtureDir {
  fs::path path;
  explicit FixtureDir(const std::string& name) : path(fs::path("agents_tmp") / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  void put(const std::string& rel, const std::string& body) const {
    const fs::path p = path / rel;
    fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::trunc);
    out << body;
  }
};

// records every request while delegating to a mock fixture set
class CapturingBackend : public Backend {
 public:
  explicit CapturingBackend(const std::string& dir) : inner_(dir) {}

  ChatResult chat(const ChatRequest& req) override {
    requests.push_back(req);
    return inner_.chat(req);
  }
  std::vector<Embedding> embed(const std::vector<std::string>& texts) override {
    return inner_.embed(texts);
  }
  int embedding_dim() const override { return inner_.embedding_dim(); }
  std::string profile() const override { return "mock"; }

  std::vector<ChatRequest> requests;

 private:
  MockBackend inner_;
};

// replays a canned response sequence; used for repair-protocol paths
class ScriptedBackend : public Backend {
 public:
  explicit ScriptedBackend(std::vector<std::string> responses)
      : responses_(std::move(responses)) {}

  ChatResult chat(const ChatRequest& req) override {
    requests.push_back(req);
    if (next_ >= responses_.size()) throw Error("script exhausted");
    return {responses_[next_++], 7};
  }
  std::vector<Embedding> embed(const std::vector<std::string>& texts) override {
    std::vector<Embedding> out;
    for (const auto& t : texts) out.push_back(hashed_embedding(t));
    return out;
  }
  int embedding_dim() const override { return kMockEmbeddingDim; }
  std::string profile() const override { return "mock"; }

  std::vector<ChatRequest> requests;

 private:
  std::vector<std::string> responses_;
  size_t next_ = 0;
};

const EmbedFn kHashedEmbed = [](const std::string& t) { return hashed_embedding(t); };

}  // namespace

// ---------------------------------------------------------------------------
// prompt set
// ---------------------------------------------------------------------------

TEST_CASE("the shipped prompt set loads with a version") {
  const PromptSet prompts = PromptSet::load(kPromptsDir);
  CHECK(prompts.version() == "1");
  const RolePrompt& extract = prompts.get("jj_extract");
  CHECK(extract.role == Role::JJ);
  CHECK(!extract.system_text.empty());
  CHECK(extract.user_template.find("{case_text}") != std::string::npos);
  CHECK(!extract.output_schema.empty());
  CHECK_THROWS_AS(prompts.get("nonexistent"), ConfigError);
}

TEST_CASE("render_prompt binds placeholders and rejects residue") {
  CHECK(render_prompt("case: {case_text}!", {{"case_text", "theft"}}) ==
        "case: theft!");
  CHECK_THROWS_AS(render_prompt("{missing} text", {}), ValidationError);
  // JSON braces in templates pass through untouched
  CHECK(render_prompt(R"({"claims": []} and {x})", {{"x", "y"}}) ==
        R"({"claims": []} and y)");
  // a binding value must not smuggle a placeholder back in
  CHECK_THROWS_AS(render_prompt("{a}", {{"a", "{b}"}}), ValidationError);
}

TEST_CASE("every shipped user template renders fully bound") {
  const PromptSet prompts = PromptSet::load(kPromptsDir);
  const std::map<std::string, std::map<std::string, std::string>> bindings = {
      {"jj_extract", {{"case_text", "T"}}},
      {"sj_gaps", {{"case_text", "T"}, {"facts", "F"}}},
      {"sj_summarize", {{"case_text", "T"}, {"facts", "F"}, {"gaps", "G"}}},
      {"cj_mitigating",
       {{"case_text", "T"}, {"facts", "F"}, {"vocabulary", "V"}}},
      {"defendant_objections", {{"judgment", "J"}, {"case_text", "T"}}},
      {"counsel_argument", {{"objection", "O"}, {"summary", "S"}}},
      {"cj_charge_direct", {{"summary", "S"}, {"vocabulary", "V"}}},
      {"cj_laws_direct", {{"summary", "S"}}},
      {"cj_single", {{"case_text", "T"}, {"documents", "D"}}},
      {"scorer_diff", {{"a", "A"}, {"b", "B"}}},
      {"scorer_sup", {{"a", "A"}, {"b", "B"}}},
      {"scorer_fv", {{"a", "A"}, {"b", "B"}}},
      {"scorer_valid", {{"a", "A"}, {"b", "B"}}},
  };
  for (const auto& [name, binding] : bindings) {
    CHECK_NOTHROW(render_prompt(prompts.get(name).user_template, binding));
  }
}

// ---------------------------------------------------------------------------
// structured output extraction
// ---------------------------------------------------------------------------

TEST_CASE("try_extract_json handles clean, fenced, and embedded objects") {
  CHECK(try_extract_json(R"({"a": 1})").has_value());
  const auto fenced = try_extract_json("```json\n{\"a\": 2}\n```");
  REQUIRE(fenced.has_value());
  CHECK(fenced->at("a") == 2);
  const auto embedded =
      try_extract_json("Sure! Here is the result: {\"a\": {\"b\": 3}} hope it helps");
  REQUIRE(embedded.has_value());
  CHECK(embedded->at("a").at("b") == 3);
  const auto strings = try_extract_json(R"(noise {"s": "brace } in string"} tail)");
  REQUIRE(strings.has_value());
  CHECK(strings->at("s") == "brace } in string");
  CHECK(!try_extract_json("no json here").has_value());
}

TEST_CASE("structured_chat repairs once, then fails preserving the raw text") {
  SUBCASE("a repair re-prompt that succeeds") {
    ScriptedBackend backend({"not json at all", R"({"ok": true})"});
    CallLog log;
    ChatRequest req;
    req.role_tag = "CJ/single/x";
    req.user_text = "original";
    const Json out = structured_chat(backend, req, R"({"ok": "bool"})", log);
    CHECK(out.at("ok") == true);
    REQUIRE(backend.requests.size() == 2);
    CHECK(backend.requests[1].user_text.find("could not be parsed") !=
          std::string::npos);
    CHECK(backend.requests[1].user_text.find(R"({"ok": "bool"})") !=
          std::string::npos);
    CHECK(log.calls.size() == 2);
  }
  SUBCASE("two unparseable replies raise StageError with the raw response") {
    ScriptedBackend backend({"garbage one", "garbage two"});
    CallLog log;
    ChatRequest req;
    req.role_tag = "CJ/single/x";
    try {
      structured_chat(backend, req, "{}", log);
      FAIL("expected StageError");
    } catch (const StageError& e) {
      CHECK(e.raw_response == "garbage two");
    }
  }
}

// ---------------------------------------------------------------------------
// extract_facts
// ---------------------------------------------------------------------------

TEST_CASE("extract_facts parses fixture facts verbatim") {
  FixtureDir dir("extract_ok");
  dir.put("JJ/extract/case_001.json",
          R"({"defendant_identification": "Zhang San, male",
              "crime_details": "stole a phone from a store",
              "criminal_motive": "personal gain"})");
  MockBackend backend(dir.path.string());
  const PromptSet prompts = PromptSet::load(kPromptsDir);
  AgentContext ctx{backend, prompts};
  CallLog log;
  const JudicialFacts facts = extract_facts(ctx, "case text", "case_001", log);
  CHECK(facts.defendant_identification == "Zhang San, male");
  CHECK(facts.crime_details == "stole a phone from a store");
  CHECK(facts.criminal_motive == "personal gain");
  CHECK(log.notes.empty());
  CHECK(log.calls.size() == 1);
}

TEST_CASE("extract_facts strips markdown fences") {
  FixtureDir dir("extract_fenced");
  dir.put("JJ/extract/case_002.json",
          "```json\n{\"defendant_identification\": \"Li\", \"crime_details\": "
          "\"fraud\", \"criminal_motive\": \"debt\"}\n```");
  MockBackend backend(dir.path.string());
  const PromptSet prompts = PromptSet::load(kPromptsDir);
  AgentContext ctx{backend, prompts};
  CallLog log;
  const JudicialFacts facts = extract_facts(ctx, "t", "case_002", log);
  CHECK(facts.defendant_identification == "Li");
}

TEST_CASE("extract_facts falls back to the not-stated marker") {
  FixtureDir dir("extract_missing");
  dir.put("JJ/extract/case_003.json",
          R"({"defendant_identification": "Wang", "crime_details": "arson"})");
  MockBackend backend(dir.path.string());
  const PromptSet prompts = PromptSet::load(kPromptsDir);
  AgentContext ctx{backend, prompts};
  CallLog log;
  const JudicialFacts facts = extract_facts(ctx, "t", "case_003", log);
  CHECK(facts.criminal_motive == kNotStated);
  REQUIRE(log.notes.size() == 1);
  CHECK(log.notes[0].find("criminal_motive") != std::string::npos);
}

// ---------------------------------------------------------------------------
// check_consistency and summarize_case
// ---------------------------------------------------------------------------

TEST_CASE("consistency score is deterministic and order-preserving") {
  FixtureDir dir("check");
  dir.put("SJ/gaps/k.json", R"({"gaps": []})");
  MockBackend backend(dir.path.string());
  const PromptSet prompts = PromptSet::load(kPromptsDir);
  AgentContext ctx{backend, prompts};

  SUBCASE("identical text and facts score 1.0") {
    JudicialFacts facts;
    facts.defendant_identification = "same text";
    facts.crime_details = "same text";
    facts.criminal_motive = "same text";
    CallLog log;
    const auto check = check_consistency(ctx, facts.concatenated(), facts,
                                         kHashedEmbed, "k", log);
    CHECK(check.score == doctest::Approx(1.0));
  }

  SUBCASE("facts excerpted from the text score above unrelated facts") {
    const std::string case_text =
        "the defendant zhang entered the store at night and stole three phones";
    JudicialFacts excerpt{"the defendant zhang", "stole three phones", "at night"};
    JudicialFacts unrelated{"apples oranges", "bananas grapes", "melons pears"};
    CallLog log;
    const double related_score =
        check_consistency(ctx, case_text, excerpt, kHashedEmbed, "k", log).score;
    const double unrelated_score =
        check_consistency(ctx, case_text, unrelated, kHashedEmbed, "k", log).score;
    CHECK(related_score > unrelated_score);
  }

  SUBCASE("a mock gap list passes through") {
    FixtureDir gaps("check_gaps");
    gaps.put("SJ/gaps/k.json",
             R"({"gaps": ["timeline unclear", "weapon origin unknown"]})");
    MockBackend b2(gaps.path.string());
    AgentContext ctx2{b2, prompts};
    JudicialFacts facts{"a", "b", "c"};
    CallLog log;
    const auto check = check_consistency(ctx2, "text", facts, kHashedEmbed, "k", log);
    CHECK(check.gaps ==
          std::vector<std::string>{"timeline unclear", "weapon origin unknown"});
  }

  SUBCASE("an LLM failure leaves gaps empty with a warning, score intact") {
    FixtureDir empty("check_fail");
    MockBackend b2(empty.path.string());
    AgentContext ctx2{b2, prompts};
    JudicialFacts facts{"a", "b", "c"};
    CallLog log;
    const auto check = check_consistency(ctx2, "a\nb\nc", facts, kHashedEmbed,
                                         "k", log);
    CHECK(check.gaps.empty());
    CHECK(check.score == doctest::Approx(1.0));
    REQUIRE(!log.notes.empty());
    CHECK(log.notes[0].find("gap listing failed") != std::string::npos);
  }
}

TEST_CASE("summarize_case returns the fixture summary and plumbs fields") {
  FixtureDir dir("summarize");
  dir.put("SJ/summarize/k.txt", "standardized summary of the theft case");
  CapturingBackend backend(dir.path.string());
  const PromptSet prompts = PromptSet::load(kPromptsDir);
  AgentContext ctx{backend, prompts};
  JudicialFacts facts{"a", "b", "c"};
  ConsistencyCheck check;
  check.score = 0.73;
  check.gaps = {"timeline unclear"};
  CallLog log;
  const CaseSummary summary = summarize_case(ctx, "case text", facts, check, "k", log);
  CHECK(summary.summary_text == "standardized summary of the theft case");
  CHECK(summary.consistency_score == 0.73);
  CHECK(summary.flagged_gaps == std::vector<std::string>{"timeline unclear"});
  // the flagged gap was rendered into the prompt
  REQUIRE(backend.requests.size() == 1);
  CHECK(backend.requests[0].user_text.find("timeline unclear") != std::string::npos);
}

TEST_CASE("an empty summary is a stage error") {
  FixtureDir dir("summarize_empty");
  dir.put("SJ/summarize/k.txt", "   \n ");
  MockBackend backend(dir.path.string());
  const PromptSet prompts = PromptSet::load(kPromptsDir);
  AgentContext ctx{backend, prompts};
  JudicialFacts facts{"a", "b", "c"};
  CallLog log;
  CHECK_THROWS_AS(summarize_case(ctx, "t", facts, {}, "k", log), StageError);
}

// ---------------------------------------------------------------------------
// mitigating factors
// ---------------------------------------------------------------------------

TEST_CASE("mitigating factors count distinct vocabulary matches") {
  const PromptSet prompts = PromptSet::load(kPromptsDir);
  JudicialFacts facts{"a", "b", "c"};

  SUBCASE("surrender and restitution count 2") {
    FixtureDir dir("mitigating_two");
    dir.put("CJ/mitigating/k.json",
            R"({"factors": ["surrender", "restitution"]})");
    MockBackend backend(dir.path.string());
    AgentContext ctx{backend, prompts};
    CallLog log;
    const auto m = count_mitigating_factors(ctx, "t", facts, "k", log);
    CHECK(m.count == 2);
  }
  SUBCASE("duplicates count once") {
    FixtureDir dir("mitigating_dup");
    dir.put("CJ/mitigating/k.json", R"({"factors": ["surrender", "surrender"]})");
    MockBackend backend(dir.path.string());
    AgentContext ctx{backend, prompts};
    CallLog log;
    const auto m = count_mitigating_factors(ctx, "t", facts, "k", log);
    CHECK(m.count == 1);
  }
  SUBCASE("factors outside the vocabulary are ignored and logged") {
    FixtureDir dir("mitigating_vocab");
    dir.put("CJ/mitigating/k.json",
            R"({"factors": ["good weather", "Confession "]})");
    MockBackend backend(dir.path.string());
    AgentContext ctx{backend, prompts};
    CallLog log;
    const auto m = count_mitigating_factors(ctx, "t", facts, "k", log);
    CHECK(m.count == 1);  // trimmed, lowercased confession matches
    REQUIRE(!log.notes.empty());
    CHECK(log.notes[0].find("good weather") != std::string::npos);
  }
  SUBCASE("a parse failure yields zero with a warning") {
    ScriptedBackend backend({"not json", "still not json"});
    AgentContext ctx{backend, prompts};
    CallLog log;
    const auto m = count_mitigating_factors(ctx, "t", facts, "k", log);
    CHECK(m.count == 0);
    CHECK(!log.notes.empty());
  }
}

// ---------------------------------------------------------------------------
// objections and arguments
// ---------------------------------------------------------------------------

TEST_CASE("objection generation caps at three claims") {
  const PromptSet prompts = PromptSet::load(kPromptsDir);
  Judgment j;
  j.charge = "ch";
  j.term = PenaltyTerm::of_months(10);

  SUBCASE("an empty claims list means acceptance") {
    FixtureDir dir("obj_empty");
    dir.put("Defendant/objections/k.json", R"({"claims": []})");
    MockBackend backend(dir.path.string());
    AgentContext ctx{backend, prompts};
    CallLog log;
    CHECK(generate_objections(ctx, j, "t", "k", log).empty());
  }
  SUBCASE("three claims pass through") {
    FixtureDir dir("obj_three");
    dir.put("Defendant/objections/k.json",
            R"({"claims": ["one", "two", "three"]})");
    MockBackend backend(dir.path.string());
    AgentContext ctx{backend, prompts};
    CallLog log;
    CHECK(generate_objections(ctx, j, "t", "k", log).size() == 3);
    CHECK(log.notes.empty());
  }
  SUBCASE("five claims truncate to three with a log entry") {
    FixtureDir dir("obj_five");
    dir.put("Defendant/objections/k.json",
            R"({"claims": ["1", "2", "3", "4", "5"]})");
    MockBackend backend(dir.path.string());
    AgentContext ctx{backend, prompts};
    CallLog log;
    const auto claims = generate_objections(ctx, j, "t", "k", log);
    CHECK(claims == std::vector<std::string>{"1", "2", "3"});
    REQUIRE(!log.notes.empty());
    CHECK(log.notes[0].find("truncated") != std::string::npos);
  }
  SUBCASE("a backend failure means the defendant stays silent") {
    FixtureDir dir("obj_fail");
    MockBackend backend(dir.path.string());
    AgentContext ctx{backend, prompts};
    CallLog log;
    CHECK(generate_objections(ctx, j, "t", "k", log).empty());
    CHECK(!log.notes.empty());
  }
}

TEST_CASE("contextual arguments render both objection and summary") {
  const PromptSet prompts = PromptSet::load(kPromptsDir);
  FixtureDir dir("arg");
  dir.put("LegalCounsel/argument/k.txt", "the sentencing ignores restitution");
  CapturingBackend backend(dir.path.string());
  AgentContext ctx{backend, prompts};
  const Objection o{"sentence too long", 0.8, 0.9};

  SUBCASE("fixture argument returned verbatim, prompt fully bound") {
    CaseSummary summary;
    summary.summary_text = "summary body";
    CallLog log;
    CHECK(contextual_argument(ctx, o, summary, "k", log) ==
          "the sentencing ignores restitution");
    REQUIRE(backend.requests.size() == 1);
    CHECK(backend.requests[0].user_text.find("sentence too long") !=
          std::string::npos);
    CHECK(backend.requests[0].user_text.find("summary body") != std::string::npos);
  }
  SUBCASE("an empty summary renders the sentinel") {
    CallLog log;
    contextual_argument(ctx, o, CaseSummary{}, "k", log);
    CHECK(backend.requests.back().user_text.find("summary unavailable") !=
          std::string::npos);
  }
}

// ---------------------------------------------------------------------------
// llm scorer
// ---------------------------------------------------------------------------

TEST_CASE("llm scorer parses, clamps, and errors per protocol") {
  const PromptSet prompts = PromptSet::load(kPromptsDir);

  SUBCASE("a fixture score passes through") {
    FixtureDir dir("scorer_ok");
    dir.put("CJ/diff/k.json", R"({"score": 0.8, "rationale": "diverges"})");
    MockBackend backend(dir.path.string());
    AgentContext ctx{backend, prompts};
    CallLog log;
    const auto v = llm_scorer(ctx, ScorerKind::Diff, "a", "b", "k", log);
    CHECK(v.score == 0.8);
    CHECK(v.rationale == "diverges");
  }
  SUBCASE("out-of-range scores clamp with a warning") {
    FixtureDir dir("scorer_clamp");
    dir.put("CJ/valid/k.json", R"({"score": 1.4})");
    MockBackend backend(dir.path.string());
    AgentContext ctx{backend, prompts};
    CallLog log;
    const auto v = llm_scorer(ctx, ScorerKind::Valid, "a", "b", "k", log);
    CHECK(v.score == 1.0);
    REQUIRE(!log.notes.empty());
    CHECK(log.notes[0].find("clamped") != std::string::npos);
  }
  SUBCASE("a non-numeric score repairs once and then errors") {
    ScriptedBackend backend({R"({"score": "high"})", R"({"score": "high"})"});
    AgentContext ctx{backend, prompts};
    CallLog log;
    CHECK_THROWS_AS(llm_scorer(ctx, ScorerKind::Sup, "a", "b", "k", log),
                    StageError);
    // the repair re-prompt happened exactly once
    CHECK(backend.requests.size() == 2);
  }
}

// ---------------------------------------------------------------------------
// ablation prompts
// ---------------------------------------------------------------------------

TEST_CASE("direct charge selection is constrained to the vocabulary") {
  const PromptSet prompts = PromptSet::load(kPromptsDir);
  ChargeKb charges;
  ChargeDef c;
  c.charge_id = "ch_theft";
  c.name = "theft";
  c.definition = "d";
  charges.index_of[c.charge_id] = 0;
  charges.entries.push_back(c);
  CaseSummary summary;
  summary.summary_text = "s";

  SUBCASE("a known charge id is accepted") {
    FixtureDir dir("direct_ok");
    dir.put("CJ/charge_direct/k.json", R"({"charge_id": "ch_theft"})");
    MockBackend backend(dir.path.string());
    AgentContext ctx{backend, prompts};
    CallLog log;
    CHECK(direct_charge(ctx, summary, charges, "k", log) == "ch_theft");
  }
  SUBCASE("an unknown charge id is a stage error") {
    FixtureDir dir("direct_bad");
    dir.put("CJ/charge_direct/k.json", R"({"charge_id": "ch_ghost"})");
    MockBackend backend(dir.path.string());
    AgentContext ctx{backend, prompts};
    CallLog log;
    CHECK_THROWS_AS(direct_charge(ctx, summary, charges, "k", log), StageError);
  }
}

TEST_CASE("direct law citation drops unknown article ids") {
  const PromptSet prompts = PromptSet::load(kPromptsDir);
  LawKb laws;
  LawArticle a;
  a.article_id = "art_1";
  a.title = "t";
  a.body = "b";
  laws.index_of[a.article_id] = 0;
  laws.entries.push_back(a);

  FixtureDir dir("direct_laws");
  dir.put("CJ/laws_direct/k.json", R"({"articles": ["art_1", "art_ghost"]})");
  MockBackend backend(dir.path.string());
  AgentContext ctx{backend, prompts};
  CaseSummary summary;
  summary.summary_text = "s";
  CallLog log;
  const auto out = direct_laws(ctx, summary, laws, "k", log);
  CHECK(out == std::set<std::string>{"art_1"});
  REQUIRE(!log.notes.empty());
  CHECK(log.notes[0].find("art_ghost") != std::string::npos);
}

TEST_CASE("single-prompt judgment validates against the KBs") {
  const PromptSet prompts = PromptSet::load(kPromptsDir);
  KbBundle kb;
  ChargeDef c;
  c.charge_id = "ch_fraud";
  c.name = "fraud";
  c.definition = "d";
  kb.charges.index_of[c.charge_id] = 0;
  kb.charges.entries.push_back(c);
  LawArticle a;
  a.article_id = "art_2";
  a.title = "t";
  a.body = "b";
  kb.laws.index_of[a.article_id] = 0;
  kb.laws.entries.push_back(a);

  FixtureDir dir("single");
  dir.put("CJ/single/k.json",
          R"({"articles": ["art_2"], "charge": "ch_fraud",
              "penalty": {"kind": "months", "months": 30}})");
  MockBackend backend(dir.path.string());
  AgentContext ctx{backend, prompts};
  CallLog log;
  const Judgment j = single_judgment(ctx, "t", "docs", kb, "k", log);
  CHECK(j.charge == "ch_fraud");
  CHECK(j.filtered_laws == std::set<std::string>{"art_2"});
  CHECK(j.term.months == 30);
  CHECK(log.calls.size() == 1);
}

TEST_CASE("tracked_chat records digests, temperature, and tokens") {
  ScriptedBackend backend({"reply body"});
  CallLog log;
  ChatRequest req;
  req.role_tag = "JJ/extract/x";
  req.system_text = "sys";
  req.user_text = "usr";
  req.temperature = 0.0;
  const ChatResult result = tracked_chat(backend, req, log);
  CHECK(result.text == "reply body");
  REQUIRE(log.calls.size() == 1);
  CHECK(log.calls[0].temperature == 0.0);
  CHECK(log.calls[0].tokens == 7);
  CHECK(log.calls[0].prompt_digest.size() == 64);
  CHECK(log.calls[0].response_digest.size() == 64);
  CHECK(log.tokens == 7);
}
