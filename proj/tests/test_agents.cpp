#include <doctest.h>

#include <cmath>

#include "uisbench/agents.hpp"
#include "uisbench/experiment.hpp"

using namespace uisbench;

namespace {

AgentProfile profile(EngineKind k, double sigma = 0.0, std::uint64_t seed = 0) {
  AgentProfile p;
  p.engine = k;
  p.noise = {sigma, seed};
  return p;
}

UisSystem honest(EngineKind k, double sigma = 0.0, std::uint64_t seed = 0) {
  return honest_parameters(profile(k, sigma, seed), default_table(), default_readings());
}

double odds(double p) { return p / (1.0 - p); }

std::vector<Case> cases(std::uint64_t seed, std::size_t n) {
  Rng rng(seed);
  std::vector<Case> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(sample_case(default_table(), default_readings(), rng));
  return out;
}

}  // namespace

TEST_CASE("honest independence reproduces the table conditionals") {
  const auto s = std::get<IndependenceSystem>(honest(EngineKind::kIndependence));
  const auto t = default_table();
  CHECK(s.params.p_nn == t.p_malfunction_given(false, false));
  CHECK(s.params.p_nh == t.p_malfunction_given(false, true));
  CHECK(s.params.p_hn == t.p_malfunction_given(true, false));
  CHECK(s.params.p_hh == t.p_malfunction_given(true, true));
  CHECK(s.params.p_hh == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(s.ramps.temperature == RampInterpreter{185, 195});
  CHECK(s.ramps.pressure == RampInterpreter{73, 79});
}

TEST_CASE("honest regression uses increments over the intercept") {
  const auto s = std::get<RegressionSystem>(honest(EngineKind::kRegression));
  CHECK(s.params.a == doctest::Approx(0.1).epsilon(1e-12));
  // P(C|E1) = (0.03 + 0.315) / 0.5
  CHECK(s.params.b1 == doctest::Approx(0.69 - 0.1).epsilon(1e-12));
  CHECK(s.params.b2 == doctest::Approx(0.59).epsilon(1e-12));
}

TEST_CASE("honest prospector scales") {
  const auto s = std::get<ProspectorSystem>(honest(EngineKind::kProspector));
  CHECK(s.conclusion_prior_scale == doctest::Approx(std::log10(0.41 / 0.59)).epsilon(1e-12));
  CHECK(s.conclusion_prior_scale == doctest::Approx(-0.158).epsilon(0.01));
  REQUIRE(s.rules.size() == 3);
  CHECK(s.rules[0].antecedent == Antecedent::kE1);
  CHECK(s.rules[0].ls_scale == doctest::Approx(std::log10(odds(0.69) / odds(0.41))));
  CHECK(s.rules[0].ln_scale == doctest::Approx(std::log10(odds(0.065 / 0.5) / odds(0.41))));
  CHECK(s.rules[0].prior_evidence_scale == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(s.rules[2].antecedent == Antecedent::kAnd);
  CHECK(s.rules[2].ls_scale == doctest::Approx(std::log10(odds(0.9) / odds(0.41))));
  CHECK(s.rules[2].prior_evidence_scale == doctest::Approx(std::log10(odds(0.35))));
}

TEST_CASE("honest emycin certainty factors") {
  const auto s = std::get<EmycinSystem>(honest(EngineKind::kEmycin));
  REQUIRE(s.rules.size() == 3);
  CHECK(s.rules[0].cf == doctest::Approx((0.69 - 0.41) / 0.59));
  CHECK(s.rules[2].cf == doctest::Approx((0.9 - 0.41) / 0.59));
  AgentProfile p = profile(EngineKind::kEmycin);
  p.vocabulary = {Antecedent::kOr};
  const auto o = std::get<EmycinSystem>(honest_parameters(p, default_table(), default_readings()));
  // P(C | E1 or E2) = 0.375 / 0.65, above the prior.
  CHECK(o.rules.at(0).cf == doctest::Approx((0.375 / 0.65 - 0.41) / 0.59));
}

TEST_CASE("honest fuzzy and dempster-shafer layouts") {
  const auto f = std::get<FuzzySystem>(honest(EngineKind::kFuzzy));
  CHECK(f.temperature.absent == Interval{160, 185});
  CHECK(f.temperature.uncertain1 == Interval{185, 190});
  CHECK(f.temperature.uncertain2 == Interval{190, 195});
  CHECK(f.temperature.present == Interval{195, 220});
  REQUIRE(f.rules.size() == 3);
  CHECK(f.rules[0].strength == doctest::Approx(0.2));
  CHECK(f.rules[2].strength == doctest::Approx(0.9));

  const auto d = std::get<DsSystem>(honest(EngineKind::kDempsterShafer));
  CHECK(d.temperature.anchors == std::array<double, 5>{180, 185, 190, 195, 200});
  CHECK(d.pressure.anchors == std::array<double, 5>{70, 73, 76, 79, 82});
}

TEST_CASE("noise perturbs within the clamp and is seeded") {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto s = std::get<IndependenceSystem>(honest(EngineKind::kIndependence, 0.5, seed));
    for (double v : {s.params.p_nn, s.params.p_nh, s.params.p_hn, s.params.p_hh}) {
      CHECK(v >= kNoisedProbabilityMin);
      CHECK(v <= kNoisedProbabilityMax);
    }
  }
  CHECK(honest(EngineKind::kProspector, 0.15, 5) == honest(EngineKind::kProspector, 0.15, 5));
  CHECK_FALSE(honest(EngineKind::kProspector, 0.15, 5) == honest(EngineKind::kProspector, 0.15, 6));
  CHECK_FALSE(honest(EngineKind::kIndependence, 0.15, 5) == honest(EngineKind::kIndependence));
}

TEST_CASE("agent belief table keeps evidence marginals") {
  const auto b = agent_belief_table(profile(EngineKind::kEmycin, 0.2, 3), default_table());
  for (bool e1 : {false, true}) {
    for (bool e2 : {false, true}) {
      CHECK(b.evidence_probability(e1, e2) == doctest::Approx(default_table().evidence_probability(e1, e2)));
    }
  }
  const auto zero = agent_belief_table(profile(EngineKind::kEmycin), default_table());
  for (std::size_t i = 0; i < 8; ++i) CHECK(zero.cells()[i] == doctest::Approx(default_table().cells()[i]).epsilon(1e-12));
}

TEST_CASE("honest systems always satisfy their invariants") {
  for (EngineKind k : kAllEngines) {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      CHECK(validate(honest(k, 0.3, seed)).empty());
    }
  }
}

TEST_CASE("degenerate tables and bad profiles are rejected") {
  const ContingencyTable no_normal({0, 0, 0.2, 0.2, 0.2, 0.2, 0.1, 0.1});
  try {
    (void)honest_parameters(profile(EngineKind::kIndependence), no_normal, default_readings());
    FAIL("expected degenerate_table");
  } catch (const Error& e) {
    CHECK(e.code() == "degenerate_table");
  }
  AgentProfile p = profile(EngineKind::kEmycin, -0.1);
  CHECK_THROWS_AS(validate_profile(p), Error);
  p.noise.sigma = 0.0;
  p.vocabulary.clear();
  CHECK_THROWS_AS(validate_profile(p), Error);
  p.engine = EngineKind::kFuzzy;
  p.vocabulary = {Antecedent::kOr};
  CHECK_THROWS_AS(validate_profile(p), Error);
  p.engine = EngineKind::kIndependence;
  CHECK_NOTHROW(validate_profile(p));
}

TEST_CASE("tunable parameter lists and access") {
  const ReadingModel r = default_readings();
  CHECK(tunable_parameters(honest(EngineKind::kProspector), r).size() == 14);
  CHECK(tunable_parameters(honest(EngineKind::kRegression), r).size() == 7);
  CHECK(tunable_parameters(honest(EngineKind::kIndependence), r).size() == 8);
  CHECK(tunable_parameters(honest(EngineKind::kDempsterShafer), r).size() == 10);
  const auto specs = tunable_parameters(honest(EngineKind::kIndependence), r);
  CHECK(specs[0].name == "params.p_nn");
  CHECK(specs[4].name == "ramps.temperature.lo");
  CHECK(specs[4].lo == 160.0);
  CHECK(specs[4].hi == 220.0);
  CHECK(specs[6].lo == 58.0);
  CHECK(specs[6].hi == 94.0);

  UisSystem s = honest(EngineKind::kIndependence);
  set_parameter(s, 1, 0.33);
  CHECK(get_parameter(s, 1) == 0.33);
  CHECK(std::get<IndependenceSystem>(s).params.p_nh == 0.33);
  CHECK_THROWS_AS(get_parameter(s, 8), Error);
}

TEST_CASE("tune_search on independence reaches the oracle") {
  Rng rng(21);
  const auto r = tune_search(profile(EngineKind::kIndependence), default_table(), default_readings(), 5000, rng);
  Rng orng(22);
  const double oracle = bayes_optimal_accuracy(default_table(), default_readings(), 100000, orng);
  CHECK(std::abs(r.final_accuracy - oracle) <= 0.02);
}

TEST_CASE("tune_search never loses accuracy and is deterministic") {
  for (EngineKind k : kAllEngines) {
    Rng a(5), b(5);
    TuneOptions o;
    o.sweeps = 2;
    const auto x = tune_search(profile(k, 0.15, 3), default_table(), default_readings(), 500, a, o);
    const auto y = tune_search(profile(k, 0.15, 3), default_table(), default_readings(), 500, b, o);
    CHECK(x.system == y.system);
    CHECK(x.sweep_accuracy == y.sweep_accuracy);
    REQUIRE(x.sweep_accuracy.size() == 3);
    for (std::size_t i = 1; i < x.sweep_accuracy.size(); ++i) {
      CHECK(x.sweep_accuracy[i] >= x.sweep_accuracy[i - 1]);
    }
    CHECK(x.final_accuracy == x.sweep_accuracy.back());
  }
  Rng rng(1);
  CHECK_THROWS_AS(tune_search(profile(EngineKind::kRegression), default_table(), default_readings(), 99, rng),
                  Error);
}

TEST_CASE("zero-noise full-vocabulary tuned systems handle mixed evidence") {
  std::vector<Case> mixed;
  for (const Case& c : cases(1234, 10000)) {
    if (classify_trial(c) == EvidenceType::kMixed) mixed.push_back(c);
  }
  for (EngineKind k : kAllEngines) {
    AgentProfile p = profile(k);
    p.vocabulary = {Antecedent::kE1, Antecedent::kE2, Antecedent::kAnd, Antecedent::kOr};
    Rng rng(7);
    const auto r = tune_search(p, default_table(), default_readings(), 2000, rng);
    INFO(to_string(k));
    CHECK(system_accuracy(r.system, mixed) >= 0.70);
  }
}

TEST_CASE("tune_iteratively bounds and immediate satisfaction") {
  Rng rng(1);
  CHECK_THROWS_AS(tune_iteratively(profile(EngineKind::kIndependence), default_table(), default_readings(), 0, rng),
                  Error);

  bool saw_immediate = false;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng r(seed);
    const auto res = tune_iteratively(profile(EngineKind::kIndependence), default_table(), default_readings(), 500, r);
    CHECK(res.satisfied);
    CHECK(res.trials_used >= 5);
    if (res.trials_used == 5) {
      saw_immediate = true;
      CHECK(res.system == honest(EngineKind::kIndependence));
    }
  }
  CHECK(saw_immediate);

  // EMYCIN starts out wrong on mixed cases, so a tiny budget runs out.
  std::size_t capped = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng r(seed);
    const auto res = tune_iteratively(profile(EngineKind::kEmycin), default_table(), default_readings(), 3, r);
    CHECK(res.trials_used <= 3);
    if (!res.satisfied) ++capped;
  }
  CHECK(capped == 20);
}

TEST_CASE("tune_iteratively is deterministic") {
  Rng a(9), b(9);
  const auto x = tune_iteratively(profile(EngineKind::kFuzzy, 0.15, 4), default_table(), default_readings(), 500, a);
  const auto y = tune_iteratively(profile(EngineKind::kFuzzy, 0.15, 4), default_table(), default_readings(), 500, b);
  CHECK(x.system == y.system);
  CHECK(x.trials_used == y.trials_used);
  CHECK(x.final_accuracy == y.final_accuracy);
}

// Expected direction: more parameters to scan should mean more trials for
// PROSPECTOR. With honest translations regression starts out answering M on
// mixed cases and needs many corrections, so the direction does not hold.
TEST_CASE("prospector needs more tuning trials than regression" * doctest::may_fail()) {
  ReplicationConfig c;
  c.engines = {EngineKind::kProspector, EngineKind::kRegression};
  const auto results = run_replication(c);
  double prospector = 0, regression = 0;
  for (const auto& r : results) {
    (r.engine == EngineKind::kProspector ? prospector : regression) += static_cast<double>(r.trials_to_tune);
  }
  INFO("prospector mean " << prospector / 10 << ", regression mean " << regression / 10);
  CHECK(prospector > regression);
}
