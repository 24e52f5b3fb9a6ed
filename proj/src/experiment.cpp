#include "uisbench/experiment.hpp"

#include <algorithm>
#include <map>

namespace uisbench {

using nlohmann::json;

namespace {

constexpr std::uint64_t kNoiseStream = 0x100;
constexpr std::uint64_t kTuneStream = 0x200;
constexpr std::uint64_t kTestStream = 0x300;

std::size_t engine_ordinal(EngineKind k) {
  return static_cast<std::size_t>(std::find(kAllEngines.begin(), kAllEngines.end(), k) -
                                  kAllEngines.begin());
}

std::vector<Antecedent> vocabulary_from_json(const json& j, const std::string& path) {
  if (!j.is_array()) throw Error("validation_error", "expected an array of rule forms", path);
  std::vector<Antecedent> out;
  for (const auto& v : j) {
    if (!v.is_string()) throw Error("validation_error", "expected a rule form string", path);
    try {
      out.push_back(antecedent_from_string(v.get<std::string>()));
    } catch (const Error& e) {
      throw Error(e.code(), e.what(), path);
    }
  }
  return out;
}

json vocabulary_to_json(const std::vector<Antecedent>& v) {
  json out = json::array();
  for (Antecedent a : v) out.push_back(to_string(a));
  return out;
}

template <class T>
void read_if(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error("validation_error", "wrong type", key);
  }
}

double standardize(double v, double lo, double hi) {
  return std::clamp((v - lo) / (hi - lo), 0.0, 1.0);
}

template <class Rule>
const Rule* find_rule(const std::vector<Rule>& rules, Antecedent a) {
  const auto it = std::find_if(rules.begin(), rules.end(),
                               [a](const Rule& r) { return r.antecedent == a; });
  return it == rules.end() ? nullptr : &*it;
}

}  // namespace

std::string_view to_string(EvidenceType t) {
  return t == EvidenceType::kMixed ? "mixed" : "consistent";
}

EvidenceType evidence_type_from_string(std::string_view s) {
  if (s == "mixed") return EvidenceType::kMixed;
  if (s == "consistent") return EvidenceType::kConsistent;
  throw Error("validation_error", "evidence type must be \"consistent\" or \"mixed\"",
              "evidence_type");
}

EvidenceType classify_trial(const Case& c) {
  return c.cell.e1_high != c.cell.e2_high ? EvidenceType::kMixed : EvidenceType::kConsistent;
}

void ReplicationConfig::validate() const {
  if (agents_per_uis < 1) throw Error("validation_error", "must be >= 1", "agents_per_uis");
  if (test_trials < 1) throw Error("validation_error", "must be >= 1", "test_trials");
  if (max_tuning_trials < 1) throw Error("validation_error", "must be >= 1", "max_tuning_trials");
  if (engines.empty()) throw Error("validation_error", "at least one engine", "engines");
  if (!std::isfinite(noise_sigma) || noise_sigma < 0.0) {
    throw Error("validation_error", "must be finite and >= 0", "noise_sigma");
  }
  readings.validate();
}

json config_to_json(const ReplicationConfig& c) {
  json engines = json::array();
  for (EngineKind k : c.engines) engines.push_back(to_string(k));
  json j = {{"agents_per_uis", c.agents_per_uis},
            {"test_trials", c.test_trials},
            {"noise_sigma", c.noise_sigma},
            {"seed", c.seed},
            {"vocabulary", vocabulary_to_json(c.vocabulary)},
            {"max_tuning_trials", c.max_tuning_trials},
            {"engines", engines},
            {"tuning",
             {{"grid_points", c.tuning.grid_points},
              {"sweeps", c.tuning.sweeps},
              {"satisfaction_run", c.tuning.satisfaction_run},
              {"evaluation_n", c.tuning.evaluation_n}}}};
  j.update(domain_to_json(c.table, c.readings));
  return j;
}

ReplicationConfig config_from_json(const json& j) {
  if (!j.is_object()) throw Error("validation_error", "config must be a JSON object");
  ReplicationConfig c;
  read_if(j, "agents_per_uis", c.agents_per_uis);
  read_if(j, "test_trials", c.test_trials);
  read_if(j, "noise_sigma", c.noise_sigma);
  read_if(j, "seed", c.seed);
  read_if(j, "max_tuning_trials", c.max_tuning_trials);
  if (j.contains("vocabulary")) c.vocabulary = vocabulary_from_json(j.at("vocabulary"), "vocabulary");
  if (j.contains("engines")) {
    c.engines.clear();
    for (const auto& e : j.at("engines")) {
      if (!e.is_string()) throw Error("validation_error", "expected engine tag", "engines");
      c.engines.push_back(engine_kind_from_string(e.get<std::string>()));
    }
  }
  if (j.contains("tuning")) {
    const json& t = j.at("tuning");
    read_if(t, "grid_points", c.tuning.grid_points);
    read_if(t, "sweeps", c.tuning.sweeps);
    read_if(t, "satisfaction_run", c.tuning.satisfaction_run);
    read_if(t, "evaluation_n", c.tuning.evaluation_n);
  }
  c.table = table_from_json(j);
  c.readings = readings_from_json(j);
  c.validate();
  return c;
}

json profile_to_json(const AgentProfile& p) {
  return {{"engine", to_string(p.engine)},
          {"sigma", p.noise.sigma},
          {"seed", p.noise.seed},
          {"vocabulary", vocabulary_to_json(p.vocabulary)}};
}

AgentProfile profile_from_json(const json& j) {
  AgentProfile p;
  if (j.contains("engine")) {
    if (!j.at("engine").is_string()) throw Error("validation_error", "expected a string", "engine");
    p.engine = engine_kind_from_string(j.at("engine").get<std::string>());
  }
  read_if(j, "sigma", p.noise.sigma);
  read_if(j, "seed", p.noise.seed);
  if (j.contains("vocabulary")) p.vocabulary = vocabulary_from_json(j.at("vocabulary"), "vocabulary");
  validate_profile(p);
  return p;
}

MixedCaseParams mixed_case_parameters(const UisSystem& sys) {
  MixedCaseParams out;
  double& nh = out.normal_temp_high_pressure;
  double& hn = out.high_temp_normal_pressure;
  if (const auto* s = std::get_if<EmycinSystem>(&sys)) {
    const auto* e2 = find_rule(s->rules, Antecedent::kE2);
    const auto* e1 = find_rule(s->rules, Antecedent::kE1);
    nh = standardize(e2 ? e2->cf : 0.0, -1.0, 1.0);
    hn = standardize(e1 ? e1->cf : 0.0, -1.0, 1.0);
  } else if (const auto* s = std::get_if<ProspectorSystem>(&sys)) {
    const double rs = kProspectorRatioScale;
    const auto* e2 = find_rule(s->rules, Antecedent::kE2);
    const auto* e1 = find_rule(s->rules, Antecedent::kE1);
    nh = standardize(e2 ? e2->ls_scale : 0.0, -rs, rs);
    hn = standardize(e1 ? e1->ls_scale : 0.0, -rs, rs);
  } else if (const auto* s = std::get_if<IndependenceSystem>(&sys)) {
    nh = s->params.p_nh;
    hn = s->params.p_hn;
  } else if (const auto* s = std::get_if<RegressionSystem>(&sys)) {
    // The proportion the model implies when one reading alone is high.
    nh = std::clamp(s->params.a + s->params.b2, 0.0, 1.0);
    hn = std::clamp(s->params.a + s->params.b1, 0.0, 1.0);
  } else if (const auto* s = std::get_if<FuzzySystem>(&sys)) {
    const auto* e2 = find_rule(s->rules, Antecedent::kE2);
    const auto* e1 = find_rule(s->rules, Antecedent::kE1);
    nh = e2 ? e2->strength : 0.0;
    hn = e1 ? e1->strength : 0.0;
  } else if (const auto* s = std::get_if<DsSystem>(&sys)) {
    // Where the neutral anchor sits between the two extreme anchors.
    const auto& p = s->pressure.anchors;
    const auto& t = s->temperature.anchors;
    nh = standardize(p[2], p[0], p[4]);
    hn = standardize(t[2], t[0], t[4]);
  }
  return out;
}

std::vector<Case> subject_test_cases(const ReplicationConfig& config, std::size_t subject) {
  Rng rng(derive_seed(config.seed, kTestStream, subject));
  std::vector<Case> cases;
  cases.reserve(config.test_trials);
  for (std::size_t i = 0; i < config.test_trials; ++i) {
    cases.push_back(sample_case(config.table, config.readings, rng));
  }
  return cases;
}

std::vector<SubjectResult> run_replication(const ReplicationConfig& config) {
  config.validate();
  std::vector<std::vector<Case>> test_sets;
  for (std::size_t s = 0; s < config.agents_per_uis; ++s) {
    test_sets.push_back(subject_test_cases(config, s));
  }

  std::vector<SubjectResult> results;
  for (EngineKind engine : config.engines) {
    const std::size_t e = engine_ordinal(engine);
    for (std::size_t s = 0; s < config.agents_per_uis; ++s) {
      AgentProfile profile;
      profile.engine = engine;
      profile.noise = {config.noise_sigma, derive_seed(config.seed, kNoiseStream + e, s)};
      profile.vocabulary = config.vocabulary;
      Rng rng(derive_seed(config.seed, kTuneStream + e, s));
      const TuneResult tuned = tune_iteratively(profile, config.table, config.readings,
                                                config.max_tuning_trials, rng, config.tuning);

      SubjectResult r;
      r.engine = engine;
      r.subject = s;
      r.trials_to_tune = tuned.trials_used;
      r.satisfied = tuned.satisfied;
      r.mixed_params = mixed_case_parameters(tuned.system);
      for (const Case& c : test_sets[s]) {
        bool ok = false;
        try {
          ok = infer(tuned.system, {c.temperature, c.pressure}).verdict == truth_of(c);
        } catch (const Error&) {
          ok = false;
        }
        r.correct.push_back(ok);
        r.evidence.push_back(classify_trial(c));
      }
      results.push_back(std::move(r));
    }
  }
  return results;
}

std::vector<EngineAccuracy> accuracy_breakdown(const std::vector<SubjectResult>& results) {
  if (results.empty()) throw Error("invalid_argument", "no results to summarise");
  std::vector<EngineAccuracy> out;
  std::vector<std::size_t> correct_consistent;
  std::vector<std::size_t> correct_mixed;
  for (const auto& r : results) {
    auto it = std::find_if(out.begin(), out.end(),
                           [&](const EngineAccuracy& a) { return a.engine == r.engine; });
    if (it == out.end()) {
      EngineAccuracy a;
      a.engine = r.engine;
      out.push_back(a);
      correct_consistent.push_back(0);
      correct_mixed.push_back(0);
      it = out.end() - 1;
    }
    const auto idx = static_cast<std::size_t>(it - out.begin());
    for (std::size_t t = 0; t < r.correct.size(); ++t) {
      if (r.evidence[t] == EvidenceType::kMixed) {
        ++it->mixed_n;
        correct_mixed[idx] += r.correct[t] ? 1 : 0;
      } else {
        ++it->consistent_n;
        correct_consistent[idx] += r.correct[t] ? 1 : 0;
      }
    }
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    auto& a = out[i];
    if (a.consistent_n > 0) {
      a.consistent = static_cast<double>(correct_consistent[i]) / static_cast<double>(a.consistent_n);
    }
    if (a.mixed_n > 0) {
      a.mixed = static_cast<double>(correct_mixed[i]) / static_cast<double>(a.mixed_n);
    }
    const std::size_t n = a.consistent_n + a.mixed_n;
    a.overall = n == 0 ? 0.0
                       : static_cast<double>(correct_consistent[i] + correct_mixed[i]) /
                             static_cast<double>(n);
  }
  return out;
}

}  // namespace uisbench
