#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <nlohmann/json.hpp>

#include <cmath>
#include <map>
#include <random>

#include "juris/errors.hpp"
#include "juris/gateway.hpp"
#include "juris/scoring.hpp"

using namespace juris;

namespace {

Embedding vec2(float x, float y) {
  Embedding v(2);
  v << x, y;
  return v;
}

// embedder with a fixed text -> vector table; unknown text is an error
EmbedFn table_embedder(std::map<std::string, Embedding> table) {
  return [table = std::move(table)](const std::string& text) {
    auto it = table.find(text);
    if (it == table.end()) {
      throw std::runtime_error("no embedding registered for: " + text);
    }
    return it->second;
  };
}

// unit vector whose cosine against (1,0) is exactly c
Embedding at_cosine(double c) {
  return vec2(static_cast<float>(c), static_cast<float>(std::sqrt(1.0 - c * c)));
}

ChargeDef charge_def(const std::string& id, const std::string& definition,
                     int base) {
  ChargeDef c;
  c.charge_id = id;
  c.name = id;
  c.definition = definition;
  c.base_sentence_months = base;
  return c;
}

PrecedentKb precedent_kb(const std::vector<Precedent>& entries) {
  PrecedentKb kb;
  for (const auto& p : entries) {
    kb.index_of[p.precedent_id] = kb.entries.size();
    kb.entries.push_back(p);
  }
  return kb;
}

ChargeKb charge_kb(const std::vector<ChargeDef>& entries) {
  ChargeKb kb;
  for (const auto& c : entries) {
    kb.index_of[c.charge_id] = kb.entries.size();
    kb.entries.push_back(c);
  }
  return kb;
}

LawKb law_kb(const std::vector<LawArticle>& entries) {
  LawKb kb;
  for (const auto& a : entries) {
    kb.index_of[a.article_id] = kb.entries.size();
    kb.entries.push_back(a);
  }
  return kb;
}

const JudicialFacts kFacts{"A", "B", "C"};  // concatenated() == "A\nB\nC"

}  // namespace

// ---------------------------------------------------------------------------
// charge alignment
// ---------------------------------------------------------------------------

TEST_CASE("align_charge_facts maps cosine onto [0,1]") {
  const ChargeDef c = charge_def("ch", "def text", 10);
  SUBCASE("identical embeddings give 1.0") {
    const EmbedFn embed = table_embedder(
        {{"def text", vec2(1, 0)}, {"A\nB\nC", vec2(1, 0)}});
    CHECK(align_charge_facts(c, kFacts, embed) == doctest::Approx(1.0));
  }
  SUBCASE("orthogonal embeddings give 0.5") {
    const EmbedFn embed = table_embedder(
        {{"def text", vec2(1, 0)}, {"A\nB\nC", vec2(0, 1)}});
    CHECK(align_charge_facts(c, kFacts, embed) == doctest::Approx(0.5));
  }
  SUBCASE("anti-parallel embeddings give 0.0") {
    const EmbedFn embed = table_embedder(
        {{"def text", vec2(1, 0)}, {"A\nB\nC", vec2(-1, 0)}});
    CHECK(align_charge_facts(c, kFacts, embed) == doctest::Approx(0.0));
  }
}

TEST_CASE("align_charge_precedents averages per-precedent alignments") {
  const ChargeDef target = charge_def("ch_target", "target def", 10);

  SUBCASE("empty hit list is neutral 0.5") {
    const EmbedFn embed = table_embedder({{"target def", vec2(1, 0)}});
    CHECK(align_charge_precedents(target, {}, {}, {}, embed) ==
          doctest::Approx(0.5));
  }

  SUBCASE("precedents all carrying the charge itself give 1.0") {
    Precedent p1, p2;
    p1.precedent_id = "p1";
    p1.fact_text = "f1";
    p1.charges = {"ch_target"};
    p2.precedent_id = "p2";
    p2.fact_text = "f2";
    p2.charges = {"ch_target"};
    const auto precedents = precedent_kb({p1, p2});
    const auto charges = charge_kb({target});
    const EmbedFn embed = table_embedder({{"target def", vec2(1, 0)}});
    const std::vector<ScoredHit> hits{{"p1", 0.9}, {"p2", 0.8}};
    CHECK(align_charge_precedents(target, hits, precedents, charges, embed) ==
          doctest::Approx(1.0));
  }

  SUBCASE("normalized sims 0.9 and 0.5 average to 0.7") {
    // normalized 0.9 -> cosine 0.8; normalized 0.5 -> cosine 0.0
    Precedent p1, p2;
    p1.precedent_id = "p1";
    p1.fact_text = "f1";
    p1.charges = {"ch_a"};
    p2.precedent_id = "p2";
    p2.fact_text = "f2";
    p2.charges = {"ch_b"};
    const auto precedents = precedent_kb({p1, p2});
    const auto charges = charge_kb({target, charge_def("ch_a", "def a", 1),
                                    charge_def("ch_b", "def b", 2)});
    const EmbedFn embed = table_embedder({{"target def", vec2(1, 0)},
                                          {"def a", at_cosine(0.8)},
                                          {"def b", at_cosine(0.0)}});
    const std::vector<ScoredHit> hits{{"p1", 0.9}, {"p2", 0.8}};
    CHECK(align_charge_precedents(target, hits, precedents, charges, embed) ==
          doctest::Approx(0.7));
  }

  SUBCASE("unknown charge inside a precedent is an error") {
    Precedent p;
    p.precedent_id = "p";
    p.fact_text = "f";
    p.charges = {"ch_ghost"};
    const auto precedents = precedent_kb({p});
    const auto charges = charge_kb({target});
    const EmbedFn embed = table_embedder({{"target def", vec2(1, 0)}});
    CHECK_THROWS_AS(
        align_charge_precedents(target, {{"p", 1.0}}, precedents, charges, embed),
        ValidationError);
  }
}

// ---------------------------------------------------------------------------
// charge selection
// ---------------------------------------------------------------------------

namespace {

// fixture with controllable fact/precedent alignments per candidate:
// candidate i's definition embeds at a chosen cosine to the facts vector; a
// single precedent carries a reference charge embedding at (1,0).
struct SelectionFixture {
  KbBundle kb;
  std::vector<ScoredHit> candidates;
  std::vector<ScoredHit> precedent_hits;
  EmbedFn embed;

  // fact_norm / prec_norm are the desired normalized alignments per candidate
  SelectionFixture(const std::vector<double>& fact_norm,
                   const std::vector<double>& prec_norm) {
    std::map<std::string, Embedding> table;
    table["A\nB\nC"] = vec2(1, 0);
    table["ref def"] = vec2(1, 0);
    Precedent p;
    p.precedent_id = "p0";
    p.fact_text = "pf";
    p.charges = {"ch_ref"};
    kb.precedents = precedent_kb({p});
    precedent_hits = {{"p0", 1.0}};

    std::vector<ChargeDef> defs{charge_def("ch_ref", "ref def", 0)};
    for (size_t i = 0; i < fact_norm.size(); ++i) {
      const std::string id = "cand_" + std::to_string(i);
      const std::string def = "def " + std::to_string(i);
      defs.push_back(charge_def(id, def, 10));
      candidates.push_back({id, 1.0});
      // one vector must satisfy both alignments: cos against facts (1,0)
      // fixes x; cos against ref (1,0) is the same x, so fact and precedent
      // alignments coincide unless we pick distinct reference directions.
      (void)prec_norm;
      table[def] = at_cosine(2.0 * fact_norm[i] - 1.0);
    }
    kb.charges = charge_kb(defs);
    embed = table_embedder(table);
  }
};

}  // namespace

TEST_CASE("select_charge basics") {
  SUBCASE("a single candidate wins") {
    SelectionFixture fx({0.8}, {0.8});
    const SelectedCharge sel = select_charge(fx.candidates, kFacts,
                                             fx.precedent_hits, fx.kb, 0.5,
                                             fx.embed);
    CHECK(sel.charge_id == "cand_0");
    REQUIRE(sel.candidates.size() == 1);
    CHECK(sel.candidates[0].combined ==
          doctest::Approx(0.5 * sel.candidates[0].fact_alignment +
                          0.5 * sel.candidates[0].precedent_alignment)
              .epsilon(1e-9));
  }
  SUBCASE("empty candidate list is an error") {
    SelectionFixture fx({0.8}, {0.8});
    CHECK_THROWS_WITH_AS(
        select_charge({}, kFacts, fx.precedent_hits, fx.kb, 0.5, fx.embed),
        "no candidate charges retrieved", ValidationError);
  }
}

TEST_CASE("combined scores derive from the component values") {
  // candidates with alignments 0.9 and 0.6 on both components; at beta = 0.7
  // the combined scores are 0.9 and 0.6 and the first candidate wins
  SelectionFixture fx({0.9, 0.6}, {0.9, 0.6});
  const SelectedCharge sel =
      select_charge(fx.candidates, kFacts, fx.precedent_hits, fx.kb, 0.7, fx.embed);
  CHECK(sel.charge_id == "cand_0");
  REQUIRE(sel.candidates.size() == 2);
  CHECK(sel.candidates[0].fact_alignment == doctest::Approx(0.9).epsilon(1e-6));
  CHECK(sel.candidates[1].fact_alignment == doctest::Approx(0.6).epsilon(1e-6));
  for (const auto& c : sel.candidates) {
    CHECK(c.combined ==
          doctest::Approx(0.7 * c.fact_alignment + 0.3 * c.precedent_alignment)
              .epsilon(1e-9));
  }
  CHECK(sel.candidates[0].combined == doctest::Approx(0.9).epsilon(1e-6));
  CHECK(sel.candidates[1].combined == doctest::Approx(0.6).epsilon(1e-6));
  CHECK(sel.candidates[0].combined > sel.candidates[1].combined);
}

TEST_CASE("beta degenerate mixes reduce to single-component argmaxes") {
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> unit(0.05, 0.95);
  for (int round = 0; round < 100; ++round) {
    const int n = 1 + static_cast<int>(unit(rng) * 6);
    std::vector<double> fact_norm;
    for (int i = 0; i < n; ++i) fact_norm.push_back(unit(rng));
    SelectionFixture fx(fact_norm, fact_norm);

    // beta = 1: winner is the fact-alignment argmax (ties by id)
    const SelectedCharge b1 =
        select_charge(fx.candidates, kFacts, fx.precedent_hits, fx.kb, 1.0,
                      fx.embed);
    size_t best = 0;
    for (size_t i = 1; i < b1.candidates.size(); ++i) {
      if (b1.candidates[i].fact_alignment > b1.candidates[best].fact_alignment ||
          (b1.candidates[i].fact_alignment == b1.candidates[best].fact_alignment &&
           b1.candidates[i].charge_id < b1.candidates[best].charge_id)) {
        best = i;
      }
    }
    CHECK(b1.charge_id == b1.candidates[best].charge_id);

    // beta = 0: winner is the precedent-alignment argmax
    const SelectedCharge b0 =
        select_charge(fx.candidates, kFacts, fx.precedent_hits, fx.kb, 0.0,
                      fx.embed);
    best = 0;
    for (size_t i = 1; i < b0.candidates.size(); ++i) {
      if (b0.candidates[i].precedent_alignment >
              b0.candidates[best].precedent_alignment ||
          (b0.candidates[i].precedent_alignment ==
               b0.candidates[best].precedent_alignment &&
           b0.candidates[i].charge_id < b0.candidates[best].charge_id)) {
        best = i;
      }
    }
    CHECK(b0.charge_id == b0.candidates[best].charge_id);
  }
}

TEST_CASE("select_charge picks the combined-score argmax with id tie-break") {
  std::mt19937 rng(29);
  std::uniform_real_distribution<double> unit(0.05, 0.95);
  std::uniform_real_distribution<double> beta_dist(0.0, 1.0);
  for (int round = 0; round < 100; ++round) {
    const int n = 2 + static_cast<int>(unit(rng) * 5);
    std::vector<double> fact_norm;
    for (int i = 0; i < n; ++i) fact_norm.push_back(unit(rng));
    SelectionFixture fx(fact_norm, fact_norm);
    const double beta = beta_dist(rng);
    const SelectedCharge sel = select_charge(fx.candidates, kFacts,
                                             fx.precedent_hits, fx.kb, beta,
                                             fx.embed);
    const ChargeCandidateScore* best = &sel.candidates[0];
    for (const auto& c : sel.candidates) {
      if (c.combined > best->combined ||
          (c.combined == best->combined && c.charge_id < best->charge_id)) {
        best = &c;
      }
    }
    CHECK(sel.charge_id == best->charge_id);
  }
}

// ---------------------------------------------------------------------------
// sentencing
// ---------------------------------------------------------------------------

TEST_CASE("sentence equals the base without precedents or mitigation") {
  const ChargeDef c = charge_def("ch", "d", 36);
  Hyperparameters h;
  const SentencingBreakdown s = compute_sentence(c, {}, {}, 0, h);
  CHECK(s.final_months == 36);
  CHECK(s.deviation_months == 0.0);
}

TEST_CASE("one precedent six months above base, uniform, delta 2, M 1") {
  const ChargeDef c = charge_def("ch", "d", 30);
  Precedent p;
  p.precedent_id = "p";
  p.fact_text = "f";
  p.penalty = PenaltyTerm::of_months(36);
  Hyperparameters h;
  h.gamma_scheme = GammaScheme::Uniform;
  h.delta_months = 2.0;
  const SentencingBreakdown s =
      compute_sentence(c, {{"p", 1.0}}, precedent_kb({p}), 1, h);
  CHECK(s.deviation_months == doctest::Approx(6.0));
  CHECK(s.final_months == 34);  // 30 + 6 - 2
}

TEST_CASE("sentence clamps at zero") {
  const ChargeDef c = charge_def("ch", "d", 3);
  Hyperparameters h;
  h.delta_months = 2.0;
  const SentencingBreakdown s = compute_sentence(c, {}, {}, 5, h);
  CHECK(s.final_months == 0);  // 3 + 0 - 10 clamped
}

TEST_CASE("life and death precedents are excluded from the deviation") {
  const ChargeDef c = charge_def("ch", "d", 20);
  Precedent lifer, monthly;
  lifer.precedent_id = "p_life";
  lifer.fact_text = "f";
  lifer.penalty = PenaltyTerm::life();
  monthly.precedent_id = "p_m";
  monthly.fact_text = "f";
  monthly.penalty = PenaltyTerm::of_months(26);
  Hyperparameters h;
  h.gamma_scheme = GammaScheme::Uniform;
  const SentencingBreakdown s = compute_sentence(
      c, {{"p_life", 0.9}, {"p_m", 0.5}}, precedent_kb({lifer, monthly}), 0, h);
  // only the month-valued precedent remains: D = 26 - 20 over one precedent
  CHECK(s.deviation_months == doctest::Approx(6.0));
  CHECK(s.final_months == 26);
}

TEST_CASE("similarity-weighted gammas normalize over retrieval scores") {
  const ChargeDef c = charge_def("ch", "d", 10);
  Precedent p1, p2;
  p1.precedent_id = "p1";
  p1.fact_text = "f";
  p1.penalty = PenaltyTerm::of_months(22);  // deviation +12
  p2.precedent_id = "p2";
  p2.fact_text = "f";
  p2.penalty = PenaltyTerm::of_months(10);  // deviation 0
  Hyperparameters h;
  h.gamma_scheme = GammaScheme::SimilarityWeighted;
  const SentencingBreakdown s = compute_sentence(
      c, {{"p1", 0.75}, {"p2", 0.25}}, precedent_kb({p1, p2}), 0, h);
  // weights 0.75 and 0.25: D = 12 * 0.75 = 9
  CHECK(s.deviation_months == doctest::Approx(9.0));
  CHECK(s.final_months == 19);
}

TEST_CASE("sentencing property suite") {
  std::mt19937 rng(31);
  std::uniform_int_distribution<int> base_dist(0, 240);
  std::uniform_int_distribution<int> n_prec(0, 8);
  std::uniform_int_distribution<int> months_dist(0, 300);
  std::uniform_int_distribution<int> m_dist(0, 6);
  std::uniform_real_distribution<double> delta_dist(0.1, 12.0);
  std::uniform_real_distribution<double> score_dist(0.0, 1.0);
  std::uniform_int_distribution<int> kind_dist(0, 5);

  for (int round = 0; round < 1000; ++round) {
    const ChargeDef c = charge_def("ch", "d", base_dist(rng));
    std::vector<Precedent> precedents;
    std::vector<ScoredHit> hits;
    const int n = n_prec(rng);
    for (int i = 0; i < n; ++i) {
      Precedent p;
      p.precedent_id = "p" + std::to_string(i);
      p.fact_text = "f";
      const int kind = kind_dist(rng);
      if (kind == 0) {
        p.penalty = PenaltyTerm::life();
      } else if (kind == 1) {
        p.penalty = PenaltyTerm::none();
      } else {
        p.penalty = PenaltyTerm::of_months(months_dist(rng));
      }
      precedents.push_back(p);
      hits.push_back({p.precedent_id, score_dist(rng)});
    }
    const PrecedentKb kb = precedent_kb(precedents);
    Hyperparameters h;
    h.delta_months = delta_dist(rng);
    h.gamma_scheme = (round % 2) ? GammaScheme::Uniform
                                 : GammaScheme::SimilarityWeighted;
    const int m = m_dist(rng);

    const SentencingBreakdown s = compute_sentence(c, hits, kb, m, h);
    CHECK(s.final_months >= 0);  // never negative

    // monotone non-increasing in M
    const SentencingBreakdown more = compute_sentence(c, hits, kb, m + 1, h);
    CHECK(more.final_months <= s.final_months);

    // uniform weights with every precedent at the base give D = 0
    std::vector<Precedent> at_base = precedents;
    for (auto& p : at_base) p.penalty = PenaltyTerm::of_months(c.base_sentence_months);
    Hyperparameters hu = h;
    hu.gamma_scheme = GammaScheme::Uniform;
    const SentencingBreakdown sb =
        compute_sentence(c, hits, precedent_kb(at_base), 0, hu);
    CHECK(sb.deviation_months == doctest::Approx(0.0));
    CHECK(sb.final_months == c.base_sentence_months);
  }
}

// ---------------------------------------------------------------------------
// law filtering
// ---------------------------------------------------------------------------

TEST_CASE("filter_laws thresholds the match scores") {
  const LawKb laws = law_kb({{"a1", "t1", "body one"},
                             {"a2", "t2", "body two"},
                             {"a3", "t3", "body three"}});
  // normalized matches engineered as 0.42, 0.28, 0.35
  const EmbedFn embed = table_embedder({{"A\nB\nC", vec2(1, 0)},
                                        {"body one", at_cosine(2 * 0.42 - 1)},
                                        {"body two", at_cosine(2 * 0.28 - 1)},
                                        {"body three", at_cosine(2 * 0.35 - 1)}});
  const std::vector<ScoredHit> hits{{"a1", 0.9}, {"a2", 0.8}, {"a3", 0.7}};

  SUBCASE("theta 0.3 keeps the 0.42 and 0.35 articles") {
    const FilteredLaws out = filter_laws(hits, laws, kFacts, 0.3, embed);
    CHECK(out.kept == std::set<std::string>{"a1", "a3"});
    CHECK(!out.empty_warning);
    REQUIRE(out.match_scores.size() == 3);
    CHECK(out.match_scores[0].second == doctest::Approx(0.42).epsilon(1e-6));
  }
  SUBCASE("theta 0 keeps everything retrieved") {
    const FilteredLaws out = filter_laws(hits, laws, kFacts, 0.0, embed);
    CHECK(out.kept.size() == 3);
  }
  SUBCASE("theta 1 with no exact alignment keeps nothing, flagged") {
    const FilteredLaws out = filter_laws(hits, laws, kFacts, 1.0, embed);
    CHECK(out.kept.empty());
    CHECK(out.empty_warning);
  }
  SUBCASE("the threshold is inclusive") {
    // orthogonal body embeds at match exactly 0.5
    const LawKb one = law_kb({{"a9", "t", "orthogonal body"}});
    const EmbedFn exact = table_embedder(
        {{"A\nB\nC", vec2(1, 0)}, {"orthogonal body", vec2(0, 1)}});
    const FilteredLaws out = filter_laws({{"a9", 0.7}}, one, kFacts, 0.5, exact);
    CHECK(out.kept == std::set<std::string>{"a9"});
  }
}

// ---------------------------------------------------------------------------
// objections
// ---------------------------------------------------------------------------

namespace {

ScorerSet constant_scorers(double diff, double sup) {
  ScorerSet s;
  s.diff = [diff](const std::string&, const std::string&) { return diff; };
  s.sup = [sup](const std::string&, const std::string&) { return sup; };
  s.fv = [](const std::string&, const std::string&) { return 0.0; };
  s.valid = [](const std::string&, const std::string&) { return 0.0; };
  return s;
}

}  // namespace

TEST_CASE("objection validation applies strict thresholds") {
  Judgment j;
  j.charge = "ch";
  j.term = PenaltyTerm::of_months(12);

  SUBCASE("both scores above tau accept") {
    const auto out =
        validate_objection("claim", j, "case", 0.5, constant_scorers(0.9, 0.8));
    REQUIRE(out.objection.has_value());
    CHECK(out.objection->diff_score == 0.9);
    CHECK(out.objection->sup_score == 0.8);
  }
  SUBCASE("a score equal to tau rejects (strict inequality)") {
    const auto out =
        validate_objection("claim", j, "case", 0.5, constant_scorers(0.9, 0.5));
    CHECK(!out.objection.has_value());
    CHECK(out.rejection_reason == "below threshold");
  }
  SUBCASE("a claim restating the judgment scores zero divergence") {
    // 1 - normalized cosine of identical texts = 0 under the heuristic
    const EmbedFn embed = [](const std::string& t) { return hashed_embedding(t); };
    const ScorerSet scorers = heuristic_scorers(embed);
    const auto out =
        validate_objection(j.to_text(), j, "case text here", 0.5, scorers);
    CHECK(!out.objection.has_value());
  }
  SUBCASE("scorer failure rejects fail-closed with the error recorded") {
    ScorerSet failing = constant_scorers(0.9, 0.9);
    failing.sup = [](const std::string&, const std::string&) -> double {
      throw std::runtime_error("backend down");
    };
    const auto out = validate_objection("claim", j, "case", 0.5, failing);
    CHECK(!out.objection.has_value());
    CHECK(out.rejection_reason.find("scorer failure") != std::string::npos);
  }
}

// ---------------------------------------------------------------------------
// appeal construction and validity
// ---------------------------------------------------------------------------

TEST_CASE("build_appeal attaches laws above eta") {
  const LawKb laws = law_kb({{"a1", "t", "strong law"}, {"a2", "t", "weak law"}});
  const std::vector<ScoredHit> hits{{"a1", 0.9}, {"a2", 0.8}};
  ScorerSet scorers;
  scorers.fv = [](const std::string& law_body, const std::string&) {
    return law_body == "strong law" ? 0.7 : 0.4;
  };
  const ArgumentFn argument = [](const Objection& o, const CaseSummary&) {
    return "argument for " + o.claim_text;
  };
  CaseSummary summary;
  summary.summary_text = "S";

  SUBCASE("fv values 0.7 and 0.4 at eta 0.5 attach only the strong law") {
    const auto out = build_appeal({Objection{"o1", 0.9, 0.9}}, hits, laws, summary,
                                  0.5, scorers, argument);
    REQUIRE(out.brief.items.size() == 1);
    REQUIRE(out.brief.items[0].supporting_laws.size() == 1);
    CHECK(out.brief.items[0].supporting_laws[0].first == "a1");
    CHECK(out.brief.items[0].contextual_argument == "argument for o1");
  }
  SUBCASE("no law above eta leaves supporting_laws empty") {
    const auto out = build_appeal({Objection{"o1", 0.9, 0.9}}, hits, laws, summary,
                                  0.95, scorers, argument);
    REQUIRE(out.brief.items.size() == 1);
    CHECK(out.brief.items[0].supporting_laws.empty());
  }
  SUBCASE("a shared law appears in every item that clears eta") {
    const auto out =
        build_appeal({Objection{"o1", 0.9, 0.9}, Objection{"o2", 0.8, 0.8}}, hits,
                     laws, summary, 0.5, scorers, argument);
    REQUIRE(out.brief.items.size() == 2);
    CHECK(out.brief.items[0].supporting_laws[0].first == "a1");
    CHECK(out.brief.items[1].supporting_laws[0].first == "a1");
  }
  SUBCASE("argument failure keeps the item, flagged") {
    const ArgumentFn failing = [](const Objection&, const CaseSummary&) -> std::string {
      throw std::runtime_error("counsel unavailable");
    };
    const auto out = build_appeal({Objection{"o1", 0.9, 0.9}}, hits, laws, summary,
                                  0.5, scorers, failing);
    REQUIRE(out.brief.items.size() == 1);
    CHECK(out.brief.items[0].contextual_argument.empty());
    REQUIRE(out.notes.size() == 1);
    CHECK(out.notes[0].find("argument generation failed") != std::string::npos);
  }
  SUBCASE("empty objections are rejected") {
    CHECK_THROWS_AS(build_appeal({}, hits, laws, summary, 0.5, scorers, argument),
                    ValidationError);
  }
}

TEST_CASE("appeal validity is the mean of weighted item scores") {
  const LawKb laws = law_kb({{"a1", "t", "law body"}});
  const std::vector<ScoredHit> hits{{"a1", 0.9}};

  SUBCASE("all component scores 1 give 1.0") {
    ScorerSet s;
    s.valid = [](const std::string&, const std::string&) { return 1.0; };
    AppealBrief brief;
    brief.items = {AppealItem{Objection{"o1", 1, 1}, {}, "arg"}};
    const auto out = appeal_validity(brief, "T", hits, laws, 0.5, s);
    CHECK(out.score == doctest::Approx(1.0));
  }
  SUBCASE("single item with Valid(a,T)=0.8 and Valid(a,R)=0.4 at theta 0.5") {
    ScorerSet s;
    s.valid = [](const std::string&, const std::string& context) {
      return context == "T" ? 0.8 : 0.4;
    };
    AppealBrief brief;
    brief.items = {AppealItem{Objection{"o1", 1, 1}, {}, "arg"}};
    const auto out = appeal_validity(brief, "T", hits, laws, 0.5, s);
    CHECK(out.score == doctest::Approx(0.6));
  }
  SUBCASE("items scoring 1 and 0 average to 0.5") {
    ScorerSet s;
    s.valid = [](const std::string& item, const std::string&) {
      return item.find("good") != std::string::npos ? 1.0 : 0.0;
    };
    AppealBrief brief;
    brief.items = {AppealItem{Objection{"good claim", 1, 1}, {}, ""},
                   AppealItem{Objection{"bad claim", 1, 1}, {}, ""}};
    const auto out = appeal_validity(brief, "T", hits, laws, 0.5, s);
    CHECK(out.score == doctest::Approx(0.5));
  }
  SUBCASE("scorer failure zeroes the item and flags it") {
    ScorerSet s;
    s.valid = [](const std::string& item, const std::string&) -> double {
      if (item.find("bad") != std::string::npos) {
        throw std::runtime_error("scorer crash");
      }
      return 1.0;
    };
    AppealBrief brief;
    brief.items = {AppealItem{Objection{"good", 1, 1}, {}, ""},
                   AppealItem{Objection{"bad", 1, 1}, {}, ""}};
    const auto out = appeal_validity(brief, "T", hits, laws, 0.5, s);
    CHECK(out.score == doctest::Approx(0.5));
    REQUIRE(out.notes.size() == 1);
    CHECK(out.notes[0].find("item 1") != std::string::npos);
  }
}

// ---------------------------------------------------------------------------
// final decision
// ---------------------------------------------------------------------------

TEST_CASE("decide_final gates on epsilon inclusively") {
  Judgment j;
  j.charge = "ch";
  j.filtered_laws = {"a1"};
  j.term = PenaltyTerm::of_months(24);
  AppealBrief brief;
  brief.items = {AppealItem{Objection{"o", 1, 1}, {}, ""}};

  int revise_calls = 0;
  const ReviseFn revise = [&](const Judgment& in, const AppealBrief&) {
    ++revise_calls;
    Judgment out = in;
    out.term = PenaltyTerm::of_months(12);
    return out;
  };

  SUBCASE("no brief concludes at the first instance") {
    const auto out = decide_final(j, std::nullopt, 0.0, 0.6, revise);
    CHECK(out.final.instance_count == 1);
    CHECK(!out.final.revised);
    CHECK(out.final.judgment == j);
    CHECK(revise_calls == 0);
  }
  SUBCASE("val below epsilon keeps the judgment") {
    const auto out = decide_final(j, brief, 0.59, 0.6, revise);
    CHECK(out.final.instance_count == 2);
    CHECK(!out.final.revised);
    CHECK(out.final.judgment == j);
    CHECK(revise_calls == 0);
  }
  SUBCASE("val equal to epsilon revises (boundary inclusive)") {
    const auto out = decide_final(j, brief, 0.6, 0.6, revise);
    CHECK(out.final.revised);
    CHECK(out.final.judgment.term.months == 12);
    CHECK(revise_calls == 1);
  }
  SUBCASE("revision failure falls back to the first-instance judgment") {
    const ReviseFn failing = [](const Judgment&, const AppealBrief&) -> Judgment {
      throw std::runtime_error("retrial aborted");
    };
    const auto out = decide_final(j, brief, 0.9, 0.6, failing);
    CHECK(!out.final.revised);
    CHECK(out.final.judgment == j);
    CHECK(out.final.instance_count == 2);
    CHECK(out.note.find("revision failed") != std::string::npos);
  }
}

TEST_CASE("val below epsilon returns a structurally identical judgment") {
  std::mt19937 rng(37);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> months(0, 300);
  for (int round = 0; round < 200; ++round) {
    Judgment j;
    j.charge = "ch_" + std::to_string(round % 7);
    const int laws = static_cast<int>(unit(rng) * 4);
    for (int i = 0; i < laws; ++i) j.filtered_laws.insert("a" + std::to_string(i));
    j.term = PenaltyTerm::of_months(months(rng));
    AppealBrief brief;
    brief.items = {AppealItem{Objection{"o", 1, 1}, {}, ""}};
    const double eps = unit(rng);
    double val = unit(rng);
    if (val >= eps) val = eps * 0.99;  // force the reject branch
    const auto out = decide_final(j, brief, val, eps, nullptr);
    CHECK(out.final.judgment == j);
    CHECK(Json(out.final.judgment).dump() == Json(j).dump());
  }
}

TEST_CASE("heuristic scorers honor their definitions") {
  const EmbedFn embed = [](const std::string& t) { return hashed_embedding(t); };
  const ScorerSet s = heuristic_scorers(embed);
  CHECK(s.diff("same words", "same words") == doctest::Approx(0.0));
  CHECK(s.sup("same words", "same words") == doctest::Approx(1.0));
  CHECK(s.fv("alpha beta", "gamma delta") == doctest::Approx(0.5));  // orthogonal
}
