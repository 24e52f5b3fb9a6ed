#include <doctest.h>

#include <cmath>

#include "generators.hpp"
#include "uisbench/engine_json.hpp"
#include "uisbench/experiment.hpp"

using namespace uisbench;

namespace {

Case at(bool e1, bool e2, bool c) {
  Case x;
  x.cell = {e1, e2, c};
  return x;
}

SubjectResult subject(EngineKind k, std::size_t id, std::vector<bool> correct, std::vector<EvidenceType> ev) {
  SubjectResult r;
  r.engine = k;
  r.subject = id;
  r.correct = std::move(correct);
  r.evidence = std::move(ev);
  return r;
}

UisSystem honest(EngineKind k) {
  AgentProfile p;
  p.engine = k;
  return honest_parameters(p, default_table(), default_readings());
}

// Random subjects x trials matrix with three groups of equal size.
std::vector<std::vector<double>> random_scores(std::uint64_t seed, std::size_t subjects, std::size_t trials) {
  Rng rng(seed);
  std::vector<std::vector<double>> m(subjects, std::vector<double>(trials));
  for (auto& row : m) {
    for (double& x : row) x = gen::uniform(rng, -3.0, 5.0);
  }
  return m;
}

}  // namespace

TEST_CASE("evidence type is mixed iff exactly one reading is high") {
  for (std::size_t i = 0; i < 8; ++i) {
    const CellLabel l = cell_from_index(i);
    const auto t = classify_trial(at(l.e1_high, l.e2_high, l.malfunction));
    CHECK((t == EvidenceType::kMixed) == (l.e1_high != l.e2_high));
  }
  CHECK(evidence_type_from_string("mixed") == EvidenceType::kMixed);
  CHECK_THROWS_AS(evidence_type_from_string("both"), Error);
}

TEST_CASE("replication shape and determinism") {
  ReplicationConfig c;
  c.agents_per_uis = 1;
  const auto a = run_replication(c);
  REQUIRE(a.size() == 6);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].engine == kAllEngines[i]);
    CHECK(a[i].correct.size() == 30);
    CHECK(a[i].evidence.size() == 30);
    CHECK(a[i].trials_to_tune >= 1);
    CHECK(a[i].trials_to_tune <= 500);
  }
  CHECK(run_replication(c) == a);
  c.seed = 2;
  CHECK_FALSE(run_replication(c) == a);
}

TEST_CASE("every engine's subject sees the same test cases") {
  ReplicationConfig c;
  c.agents_per_uis = 3;
  const auto results = run_replication(c);
  for (std::size_t s = 0; s < 3; ++s) {
    const auto cases = subject_test_cases(c, s);
    for (const auto& r : results) {
      if (r.subject != s) continue;
      for (std::size_t t = 0; t < cases.size(); ++t) CHECK(r.evidence[t] == classify_trial(cases[t]));
    }
  }
}

TEST_CASE("zero-noise agents do well on consistent evidence") {
  ReplicationConfig c;
  c.noise_sigma = 0.0;
  const auto acc = accuracy_breakdown(run_replication(c));
  REQUIRE(acc.size() == 6);
  for (const auto& a : acc) {
    INFO(to_string(a.engine));
    REQUIRE(a.consistent.has_value());
    CHECK(*a.consistent >= 0.84);
  }
}

TEST_CASE("replication config validation") {
  ReplicationConfig c;
  c.agents_per_uis = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.noise_sigma = -1;
  CHECK_THROWS_AS(run_replication(c), Error);
  c = {};
  c.engines.clear();
  CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("accuracy breakdown by hand") {
  using E = EvidenceType;
  std::vector<SubjectResult> rs = {
      subject(EngineKind::kFuzzy, 0, {true, false, true, true}, {E::kMixed, E::kMixed, E::kConsistent, E::kMixed}),
      subject(EngineKind::kEmycin, 0, {false, false, true, true},
              {E::kConsistent, E::kConsistent, E::kConsistent, E::kMixed}),
  };
  const auto acc = accuracy_breakdown(rs);
  REQUIRE(acc.size() == 2);
  CHECK(acc[0].engine == EngineKind::kFuzzy);
  CHECK(acc[0].mixed_n == 3);
  CHECK(*acc[0].mixed == doctest::Approx(2.0 / 3.0));
  CHECK(*acc[0].consistent == 1.0);
  CHECK(acc[0].overall == 0.75);
  CHECK(*acc[1].consistent == doctest::Approx(1.0 / 3.0));
  CHECK(*acc[1].mixed == 1.0);
  CHECK(acc[1].overall == 0.5);

  rs = {subject(EngineKind::kRegression, 0, {true, true}, {E::kConsistent, E::kConsistent})};
  const auto only = accuracy_breakdown(rs);
  CHECK(*only[0].consistent == 1.0);
  CHECK_FALSE(only[0].mixed.has_value());
}

TEST_CASE("breakdown proportions recombine to the overall mean") {
  ReplicationConfig c;
  c.agents_per_uis = 4;
  const auto results = run_replication(c);
  for (const auto& a : accuracy_breakdown(results)) {
    const double n = static_cast<double>(a.consistent_n + a.mixed_n);
    const double weighted = (a.consistent.value_or(0) * static_cast<double>(a.consistent_n) +
                             a.mixed.value_or(0) * static_cast<double>(a.mixed_n)) /
                            n;
    CHECK(weighted == doctest::Approx(a.overall).epsilon(1e-12));
    CHECK(a.overall >= 0.0);
    CHECK(a.overall <= 1.0);
  }
}

TEST_CASE("mixed-case parameters of honest systems") {
  const auto ind = mixed_case_parameters(honest(EngineKind::kIndependence));
  CHECK(ind.normal_temp_high_pressure == doctest::Approx(0.2));
  CHECK(ind.high_temp_normal_pressure == doctest::Approx(0.2));
  const auto reg = mixed_case_parameters(honest(EngineKind::kRegression));
  CHECK(reg.normal_temp_high_pressure == doctest::Approx(0.69));
  CHECK(reg.high_temp_normal_pressure == doctest::Approx(0.69));
  const auto em = mixed_case_parameters(honest(EngineKind::kEmycin));
  CHECK(em.high_temp_normal_pressure == doctest::Approx(((0.69 - 0.41) / 0.59 + 1.0) / 2.0));
  const auto fz = mixed_case_parameters(honest(EngineKind::kFuzzy));
  CHECK(fz.normal_temp_high_pressure == doctest::Approx(0.2));
  const auto ds = mixed_case_parameters(honest(EngineKind::kDempsterShafer));
  CHECK(ds.normal_temp_high_pressure == doctest::Approx(0.5));
  const auto pr = mixed_case_parameters(honest(EngineKind::kProspector));
  const double ls = std::log10((0.69 / 0.31) / (0.41 / 0.59));
  CHECK(pr.high_temp_normal_pressure == doctest::Approx((ls + 6.0) / 12.0));
  for (EngineKind k : kAllEngines) {
    const auto m = mixed_case_parameters(honest(k));
    CHECK(m.normal_temp_high_pressure >= 0.0);
    CHECK(m.normal_temp_high_pressure <= 1.0);
  }
}

TEST_CASE("one-way anova by hand") {
  // Means 2 and 5, grand 3.5: SSB = 6 * 2.25 = 13.5, SSW = 4, F = 13.5 / 1.
  const auto a = one_way_anova({{1, 2, 3}, {4, 5, 6}});
  CHECK(a.df_between == 1);
  CHECK(a.df_within == 4);
  CHECK(a.ss_between == 13.5);
  CHECK(a.ss_within == 4.0);
  CHECK(a.f.value == 13.5);
  CHECK_FALSE(a.f.infinite);

  CHECK(one_way_anova({{1, 2, 3}, {1, 2, 3}}).f.value == 0.0);
  const auto inf = one_way_anova({{1, 1}, {2, 2}});
  CHECK(inf.f.infinite);
  CHECK(std::isinf(inf.f.value));

  CHECK_THROWS_AS(one_way_anova({{1, 2, 3}}), Error);
  CHECK_THROWS_AS(one_way_anova({{1, 2}, {3}}), Error);
}

TEST_CASE("mixed anova degrees of freedom for six groups of ten") {
  const auto m = random_scores(3, 60, 30);
  std::vector<std::size_t> g(60);
  for (std::size_t i = 0; i < 60; ++i) g[i] = i / 10;
  const auto t = mixed_anova(m, g);
  CHECK(t.row("UIS").df == 5);
  CHECK(t.row("SUBJ(UIS)").df == 54);
  CHECK(t.row("BETWEEN").df == 59);
  CHECK(t.row("TRIALS").df == 29);
  CHECK(t.row("UIS*TRIALS").df == 145);
  CHECK(t.row("TRIALS*SUBJ(UIS)").df == 1566);
  CHECK(t.row("WITHIN").df == 1740);
  CHECK(t.row("TOTAL").df == 1799);
  CHECK_THROWS_AS(t.row("RESIDUAL"), Error);
}

TEST_CASE("mixed anova sums of squares add up") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    const std::size_t G = gen::index(rng, 2, 5);
    const std::size_t S = gen::index(rng, 2, 6);
    const std::size_t T = gen::index(rng, 2, 11);
    const auto m = random_scores(seed + 100, G * S, T);
    std::vector<std::size_t> g;
    // Interleaved group labels; 7 is coprime to every G used, so groups stay balanced.
    for (std::size_t i = 0; i < G * S; ++i) g.push_back((i * 7) % G);
    const auto t = mixed_anova(m, g);
    const double scale = t.row("TOTAL").ss;
    CHECK(std::abs(t.row("BETWEEN").ss - t.row("UIS").ss - t.row("SUBJ(UIS)").ss) <= 1e-9 * scale);
    CHECK(std::abs(t.row("WITHIN").ss - t.row("TRIALS").ss - t.row("UIS*TRIALS").ss -
                   t.row("TRIALS*SUBJ(UIS)").ss) <= 1e-9 * scale);
    CHECK(std::abs(t.row("TOTAL").ss - t.row("BETWEEN").ss - t.row("WITHIN").ss) <= 1e-9 * scale);
  }
}

TEST_CASE("mixed anova of a constant matrix is all zero") {
  const std::vector<std::vector<double>> m(6, std::vector<double>(4, 1.0));
  const auto t = mixed_anova(m, {0, 0, 1, 1, 2, 2});
  for (const auto& r : t.rows) CHECK(r.ss == 0.0);
  CHECK(t.row("UIS").f->infinite);
}

TEST_CASE("mixed anova on a hand-worked 2x2x2 design") {
  // Group 0: [1 0], [1 1]; group 1: [0 0], [1 0]. Grand mean 0.5.
  const auto t = mixed_anova({{1, 0}, {1, 1}, {0, 0}, {1, 0}}, {0, 0, 1, 1});
  CHECK(t.row("BETWEEN").ss == doctest::Approx(1.0));
  CHECK(t.row("UIS").ss == doctest::Approx(0.5));
  CHECK(t.row("SUBJ(UIS)").ss == doctest::Approx(0.5));
  CHECK(t.row("TRIALS").ss == doctest::Approx(0.5));
  CHECK(t.row("UIS*TRIALS").ss == doctest::Approx(0.0));
  CHECK(t.row("TRIALS*SUBJ(UIS)").ss == doctest::Approx(0.5));
  CHECK(t.row("TOTAL").ss == doctest::Approx(2.0));
  CHECK(t.row("UIS").f->value == doctest::Approx(2.0));
  CHECK(t.row("TRIALS").f->value == doctest::Approx(2.0));
  CHECK(t.row("SUBJ(UIS)").df == 2);
  CHECK(t.row("TRIALS*SUBJ(UIS)").df == 2);
}

TEST_CASE("mixed anova rejects unbalanced designs") {
  auto code = [](auto&& f) {
    try {
      f();
    } catch (const Error& e) {
      return e.code();
    }
    return std::string("none");
  };
  CHECK(code([] { mixed_anova({{1, 0}, {1, 1}, {0, 0}}, {0, 0, 1}); }) == "unbalanced_design");
  CHECK(code([] { mixed_anova({{1, 0}, {1, 1}, {0, 0}, {1}}, {0, 0, 1, 1}); }) == "unbalanced_design");
  CHECK(code([] { mixed_anova({{1, 0}, {1, 1}}, {0, 0}); }) == "unbalanced_design");
  CHECK(code([] { mixed_anova({{1, 0}, {1, 1}}, {0}); }) == "unbalanced_design");
}

TEST_CASE("csv and json round trips") {
  ReplicationConfig c;
  c.agents_per_uis = 2;
  const auto results = run_replication(c);
  CHECK(results_from_json(results_to_json(results)) == results);

  const auto back = results_from_csv(results_to_csv(results));
  REQUIRE(back.size() == results.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].engine == results[i].engine);
    CHECK(back[i].subject == results[i].subject);
    CHECK(back[i].correct == results[i].correct);
    CHECK(back[i].evidence == results[i].evidence);
    CHECK(back[i].trials_to_tune == results[i].trials_to_tune);
  }
  try {
    (void)results_from_csv("engine,subject\nfuzzy,zero\n");
    FAIL("expected parse_error");
  } catch (const Error& e) {
    CHECK(e.code() == "parse_error");
  }
}

TEST_CASE("config and profile json round trips") {
  ReplicationConfig c;
  c.seed = 99;
  c.noise_sigma = 0.3;
  c.engines = {EngineKind::kFuzzy, EngineKind::kEmycin};
  c.vocabulary = {Antecedent::kE1, Antecedent::kOr};
  const auto back = config_from_json(config_to_json(c));
  CHECK(back.seed == 99);
  CHECK(back.noise_sigma == 0.3);
  CHECK(back.engines == c.engines);
  CHECK(back.vocabulary == c.vocabulary);
  CHECK(back.table.cells() == c.table.cells());
  CHECK(config_to_json(back) == config_to_json(c));

  const auto partial = config_from_json(nlohmann::json{{"agents_per_uis", 3}});
  CHECK(partial.agents_per_uis == 3);
  CHECK(partial.seed == 1);
  CHECK_THROWS_AS(config_from_json(nlohmann::json{{"engines", {"bayesian"}}}), Error);

  AgentProfile p;
  p.engine = EngineKind::kDempsterShafer;
  p.noise = {0.2, 17};
  p.vocabulary = {Antecedent::kAnd};
  const auto q = profile_from_json(profile_to_json(p));
  CHECK(q.engine == p.engine);
  CHECK(q.noise.sigma == 0.2);
  CHECK(q.noise.seed == 17);
  CHECK(q.vocabulary == p.vocabulary);
}

TEST_CASE("report for a single subject has every table") {
  ReplicationConfig c;
  c.agents_per_uis = 1;
  const auto results = run_replication(c);
  const auto j = report_json(results, c);
  CHECK(j["metadata"]["seed"] == 1);
  CHECK(j["metadata"]["version"] == std::string(kVersion));
  CHECK(j["tables"]["trials_to_tune"].size() == 6);
  CHECK(j["tables"]["accuracy_by_evidence"].size() == 6);
  CHECK(j["tables"]["mixed_case_parameters"]["rows"].size() == 6);
  CHECK(j["tables"]["anova"].is_null());
  CHECK(j["tables"].contains("anova_note"));

  const auto text = report_text(results, c);
  CHECK(text.find("human reference (original participant study)") != std::string::npos);
  CHECK(render_report(results, c, ReportFormat::kCsv) == results_to_csv(results));
  CHECK(nlohmann::json::parse(render_report(results, c, ReportFormat::kJson)) == j);
}

TEST_CASE("report with a full replication includes the anova") {
  ReplicationConfig c;
  c.agents_per_uis = 3;
  const auto results = run_replication(c);
  const auto j = report_json(results, c);
  REQUIRE(j["tables"]["anova"].is_array());
  CHECK(j["tables"]["anova"].size() == 8);
  CHECK(report_text(results, c).find("TRIALS*SUBJ(UIS)") != std::string::npos);
}
