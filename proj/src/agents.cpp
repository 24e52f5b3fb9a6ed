#include "uisbench/agents.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <limits>
#include <tuple>

namespace uisbench {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

using EvidencePredicate = std::function<bool(bool, bool)>;

EvidencePredicate predicate_for(Antecedent a) {
  switch (a) {
    case Antecedent::kE1: return [](bool e1, bool) { return e1; };
    case Antecedent::kE2: return [](bool, bool e2) { return e2; };
    case Antecedent::kAnd: return [](bool e1, bool e2) { return e1 && e2; };
    case Antecedent::kOr: return [](bool e1, bool e2) { return e1 || e2; };
  }
  return [](bool, bool) { return false; };
}

double probability_of(const ContingencyTable& t, const EvidencePredicate& pred) {
  double p = 0.0;
  for (bool e1 : {false, true}) {
    for (bool e2 : {false, true}) {
      if (pred(e1, e2)) p += t.evidence_probability(e1, e2);
    }
  }
  return p;
}

double malfunction_given(const ContingencyTable& t, const EvidencePredicate& pred) {
  const double denom = probability_of(t, pred);
  if (denom <= 0.0) {
    throw Error("degenerate_table", "conditioning evidence event has zero probability");
  }
  double numer = 0.0;
  for (bool e1 : {false, true}) {
    for (bool e2 : {false, true}) {
      if (pred(e1, e2)) numer += t.joint({e1, e2, true});
    }
  }
  return numer / denom;
}

// Draws the agent's estimation error for one probability-scale quantity.
class Estimator {
 public:
  explicit Estimator(const NoiseSpec& spec) : sigma_(spec.sigma), rng_(spec.seed) {}

  double operator()(double truth) {
    if (sigma_ <= 0.0) return truth;
    std::normal_distribution<double> noise(0.0, sigma_);
    return std::clamp(truth + noise(rng_), kNoisedProbabilityMin, kNoisedProbabilityMax);
  }

 private:
  double sigma_;
  Rng rng_;
};

struct Landmarks {
  double lo;
  double mid;
  double hi;
  double far_low;
  double far_high;
  double outer_low;
  double outer_high;
};

Landmarks landmarks(const Gaussian& normal, const Gaussian& high) {
  Landmarks m{};
  m.lo = normal.mean + normal.sd;
  m.hi = high.mean - high.sd;
  if (!(m.lo < m.hi)) {
    const double centre = 0.5 * (normal.mean + high.mean);
    const double half = 0.25 * (normal.sd + high.sd);
    m.lo = centre - half;
    m.hi = centre + half;
  }
  m.mid = 0.5 * (m.lo + m.hi);
  m.far_low = normal.mean < m.lo ? normal.mean : m.lo - normal.sd;
  m.far_high = high.mean > m.hi ? high.mean : m.hi + high.sd;
  m.outer_low = std::min(normal.mean, high.mean) - 4.0 * normal.sd;
  m.outer_high = std::max(normal.mean, high.mean) + 4.0 * high.sd;
  return m;
}

EvidenceRamps honest_ramps(const ReadingModel& r) {
  const Landmarks t = landmarks(r.normal_temp, r.high_temp);
  const Landmarks p = landmarks(r.normal_pressure, r.high_pressure);
  return {{t.lo, t.hi}, {p.lo, p.hi}};
}

FuzzyMembership honest_membership(const Gaussian& normal, const Gaussian& high) {
  const Landmarks m = landmarks(normal, high);
  return {{std::min(m.outer_low, m.lo), m.lo},
          {m.hi, std::max(m.outer_high, m.hi)},
          {m.lo, m.mid},
          {m.mid, m.hi}};
}

SupportFunction honest_support(const Gaussian& normal, const Gaussian& high) {
  const Landmarks m = landmarks(normal, high);
  return {{m.far_low, m.lo, m.mid, m.hi, m.far_high}};
}

double clamp_scale(double v, double bound) { return std::clamp(v, -bound, bound); }

std::vector<Antecedent> rule_forms(const AgentProfile& profile, bool allow_or) {
  std::vector<Antecedent> out;
  for (Antecedent a : {Antecedent::kE1, Antecedent::kE2, Antecedent::kAnd, Antecedent::kOr}) {
    if (a == Antecedent::kOr && !allow_or) continue;
    if (std::find(profile.vocabulary.begin(), profile.vocabulary.end(), a) !=
        profile.vocabulary.end()) {
      out.push_back(a);
    }
  }
  return out;
}

// Evidence configuration in which only this antecedent's own evidence holds.
std::pair<bool, bool> alone(Antecedent a) {
  switch (a) {
    case Antecedent::kE1: return {true, false};
    case Antecedent::kE2: return {false, true};
    default: return {true, true};
  }
}

}  // namespace

void validate_profile(const AgentProfile& profile) {
  if (!std::isfinite(profile.noise.sigma) || profile.noise.sigma < 0.0) {
    throw Error("validation_error", "noise sigma must be finite and >= 0", "noise.sigma");
  }
  const bool rule_based = profile.engine == EngineKind::kEmycin ||
                          profile.engine == EngineKind::kProspector ||
                          profile.engine == EngineKind::kFuzzy;
  if (rule_based && rule_forms(profile, profile.engine != EngineKind::kFuzzy).empty()) {
    throw Error("validation_error", "rule vocabulary admits no rule for this engine",
                "vocabulary");
  }
}

ContingencyTable agent_belief_table(const AgentProfile& profile, const ContingencyTable& table) {
  // A separate stream from the parameter estimates; the agent's judgement
  // of cases and its answers to the engine's questions are distinct acts.
  Estimator estimate(NoiseSpec{profile.noise.sigma, derive_seed(profile.noise.seed, 0xbe11ef)});
  std::array<double, 8> cells{};
  for (bool e1 : {false, true}) {
    for (bool e2 : {false, true}) {
      const double pe = table.evidence_probability(e1, e2);
      const double pc = pe > 0.0 ? estimate(table.p_malfunction_given(e1, e2)) : 0.0;
      cells[cell_index({e1, e2, true})] = pe * pc;
      cells[cell_index({e1, e2, false})] = pe * (1.0 - pc);
    }
  }
  // Re-normalise away rounding so the table invariant holds exactly.
  double sum = 0.0;
  for (double c : cells) sum += c;
  for (double& c : cells) c /= sum;
  return ContingencyTable(cells);
}

UisSystem honest_parameters(const AgentProfile& profile, const ContingencyTable& table,
                            const ReadingModel& readings) {
  validate_profile(profile);
  readings.validate();
  Estimator estimate(profile.noise);
  const EvidenceRamps ramps = honest_ramps(readings);

  switch (profile.engine) {
    case EngineKind::kIndependence: {
      IndependenceSystem s;
      s.params.p_nn = estimate(table.p_malfunction_given(false, false));
      s.params.p_nh = estimate(table.p_malfunction_given(false, true));
      s.params.p_hn = estimate(table.p_malfunction_given(true, false));
      s.params.p_hh = estimate(table.p_malfunction_given(true, true));
      s.ramps = ramps;
      return s;
    }
    case EngineKind::kRegression: {
      RegressionSystem s;
      const double a = estimate(table.p_malfunction_given(false, false));
      const double p1 = estimate(malfunction_given(table, predicate_for(Antecedent::kE1)));
      const double p2 = estimate(malfunction_given(table, predicate_for(Antecedent::kE2)));
      s.params = {a, std::clamp(p1 - a, -1.0, 1.0), std::clamp(p2 - a, -1.0, 1.0)};
      s.ramps = ramps;
      return s;
    }
    case EngineKind::kEmycin: {
      EmycinSystem s;
      const double prior = estimate(table.p_malfunction());
      for (Antecedent a : rule_forms(profile, true)) {
        const double p = estimate(malfunction_given(table, predicate_for(a)));
        double cf = 0.0;
        if (p > prior) {
          cf = (p - prior) / (1.0 - prior);
        } else if (p < prior) {
          cf = (p - prior) / prior;
        }
        s.rules.push_back({a, std::clamp(cf, -1.0, 1.0)});
      }
      s.ramps = ramps;
      return s;
    }
    case EngineKind::kProspector: {
      ProspectorSystem s;
      const double prior = estimate(table.p_malfunction());
      if (!(prior > 0.0 && prior < 1.0)) {
        throw Error("degenerate_table", "conclusion prior must lie strictly between 0 and 1");
      }
      const double prior_odds = probability_to_odds(prior);
      const double rs = kProspectorRatioScale;
      const double ps = kProspectorPriorScale;
      s.conclusion_prior_scale = clamp_scale(std::log10(prior_odds), ps);
      for (Antecedent a : rule_forms(profile, true)) {
        const auto pred = predicate_for(a);
        const auto negated = [pred](bool e1, bool e2) { return !pred(e1, e2); };
        const double p_e = estimate(malfunction_given(table, pred));
        const double p_not_e = estimate(malfunction_given(table, negated));
        const double p_ante = estimate(probability_of(table, pred));
        ProspectorRule r;
        r.antecedent = a;
        // LS = O(C|E)/O(C) = P(E|C)/P(E|~C); LN likewise for ~E.
        r.ls_scale = clamp_scale(std::log10(probability_to_odds(p_e) / prior_odds), rs);
        r.ln_scale = clamp_scale(std::log10(probability_to_odds(p_not_e) / prior_odds), rs);
        r.prior_evidence_scale = clamp_scale(std::log10(probability_to_odds(p_ante)), ps);
        s.rules.push_back(r);
      }
      s.ramps = ramps;
      return s;
    }
    case EngineKind::kFuzzy: {
      FuzzySystem s;
      s.temperature = honest_membership(readings.normal_temp, readings.high_temp);
      s.pressure = honest_membership(readings.normal_pressure, readings.high_pressure);
      for (Antecedent a : rule_forms(profile, false)) {
        const auto [e1, e2] = alone(a);
        s.rules.push_back({a, estimate(table.p_malfunction_given(e1, e2))});
      }
      return s;
    }
    case EngineKind::kDempsterShafer: {
      DsSystem s;
      s.temperature = honest_support(readings.normal_temp, readings.high_temp);
      s.pressure = honest_support(readings.normal_pressure, readings.high_pressure);
      return s;
    }
  }
  throw Error("validation_error", "unknown engine kind", "engine");
}

// ---------------------------------------------------------------------------
// Parameter access
// ---------------------------------------------------------------------------

namespace {

struct Slot {
  std::string name;
  double lo;
  double hi;
  double* value;
};

struct ReadingRange {
  double temp_lo = 0.0;
  double temp_hi = 0.0;
  double pres_lo = 0.0;
  double pres_hi = 0.0;
};

ReadingRange reading_range(const ReadingModel* r) {
  if (r == nullptr) return {};
  return {std::min(r->normal_temp.mean, r->high_temp.mean) - 4.0 * r->normal_temp.sd,
          std::max(r->normal_temp.mean, r->high_temp.mean) + 4.0 * r->high_temp.sd,
          std::min(r->normal_pressure.mean, r->high_pressure.mean) - 4.0 * r->normal_pressure.sd,
          std::max(r->normal_pressure.mean, r->high_pressure.mean) + 4.0 * r->high_pressure.sd};
}

void add_ramps(std::vector<Slot>& out, EvidenceRamps& r, const ReadingRange& rr) {
  out.push_back({"ramps.temperature.lo", rr.temp_lo, rr.temp_hi, &r.temperature.lo});
  out.push_back({"ramps.temperature.hi", rr.temp_lo, rr.temp_hi, &r.temperature.hi});
  out.push_back({"ramps.pressure.lo", rr.pres_lo, rr.pres_hi, &r.pressure.lo});
  out.push_back({"ramps.pressure.hi", rr.pres_lo, rr.pres_hi, &r.pressure.hi});
}

void add_membership(std::vector<Slot>& out, const std::string& base, FuzzyMembership& m,
                    double lo, double hi) {
  const std::pair<const char*, Interval*> all[] = {{"absent", &m.absent},
                                                   {"uncertain1", &m.uncertain1},
                                                   {"uncertain2", &m.uncertain2},
                                                   {"present", &m.present}};
  for (const auto& [name, iv] : all) {
    out.push_back({base + "." + name + ".lo", lo, hi, &iv->lo});
    out.push_back({base + "." + name + ".hi", lo, hi, &iv->hi});
  }
}

std::vector<Slot> slots(UisSystem& sys, const ReadingModel* readings) {
  const ReadingRange rr = reading_range(readings);
  std::vector<Slot> out;
  std::visit(
      Overloaded{
          [&](EmycinSystem& s) {
            for (std::size_t i = 0; i < s.rules.size(); ++i) {
              out.push_back({"rules[" + std::to_string(i) + "].cf", -1.0, 1.0, &s.rules[i].cf});
            }
            add_ramps(out, s.ramps, rr);
          },
          [&](ProspectorSystem& s) {
            const double rs = kProspectorRatioScale;
            const double ps = kProspectorPriorScale;
            for (std::size_t i = 0; i < s.rules.size(); ++i) {
              const std::string b = "rules[" + std::to_string(i) + "].";
              out.push_back({b + "ls_scale", -rs, rs, &s.rules[i].ls_scale});
              out.push_back({b + "ln_scale", -rs, rs, &s.rules[i].ln_scale});
              out.push_back({b + "prior_evidence_scale", -ps, ps, &s.rules[i].prior_evidence_scale});
            }
            out.push_back({"conclusion_prior_scale", -ps, ps, &s.conclusion_prior_scale});
            add_ramps(out, s.ramps, rr);
          },
          [&](IndependenceSystem& s) {
            out.push_back({"params.p_nn", 0.0, 1.0, &s.params.p_nn});
            out.push_back({"params.p_nh", 0.0, 1.0, &s.params.p_nh});
            out.push_back({"params.p_hn", 0.0, 1.0, &s.params.p_hn});
            out.push_back({"params.p_hh", 0.0, 1.0, &s.params.p_hh});
            add_ramps(out, s.ramps, rr);
          },
          [&](RegressionSystem& s) {
            out.push_back({"params.a", 0.0, 1.0, &s.params.a});
            out.push_back({"params.b1", -1.0, 1.0, &s.params.b1});
            out.push_back({"params.b2", -1.0, 1.0, &s.params.b2});
            add_ramps(out, s.ramps, rr);
          },
          [&](FuzzySystem& s) {
            for (std::size_t i = 0; i < s.rules.size(); ++i) {
              out.push_back(
                  {"rules[" + std::to_string(i) + "].strength", 0.0, 1.0, &s.rules[i].strength});
            }
            add_membership(out, "temperature", s.temperature, rr.temp_lo, rr.temp_hi);
            add_membership(out, "pressure", s.pressure, rr.pres_lo, rr.pres_hi);
          },
          [&](DsSystem& s) {
            for (std::size_t i = 0; i < 5; ++i) {
              out.push_back({"temperature.anchors[" + std::to_string(i) + "]", rr.temp_lo,
                             rr.temp_hi, &s.temperature.anchors[i]});
            }
            for (std::size_t i = 0; i < 5; ++i) {
              out.push_back({"pressure.anchors[" + std::to_string(i) + "]", rr.pres_lo, rr.pres_hi,
                             &s.pressure.anchors[i]});
            }
          },
      },
      sys);
  return out;
}

}  // namespace

std::vector<ParamSpec> tunable_parameters(const UisSystem& sys, const ReadingModel& readings) {
  UisSystem copy = sys;
  std::vector<ParamSpec> out;
  for (const auto& s : slots(copy, &readings)) out.push_back({s.name, s.lo, s.hi});
  return out;
}

double get_parameter(const UisSystem& sys, std::size_t index) {
  UisSystem copy = sys;
  auto all = slots(copy, nullptr);
  if (index >= all.size()) throw Error("invalid_argument", "parameter index out of range");
  return *all[index].value;
}

void set_parameter(UisSystem& sys, std::size_t index, double value) {
  auto all = slots(sys, nullptr);
  if (index >= all.size()) throw Error("invalid_argument", "parameter index out of range");
  *all[index].value = value;
}

// ---------------------------------------------------------------------------
// Tuning
// ---------------------------------------------------------------------------

namespace {

std::optional<BeliefReport> try_infer(const UisSystem& sys, const Case& c) {
  try {
    return infer(sys, {c.temperature, c.pressure});
  } catch (const Error&) {
    return std::nullopt;
  }
}

double grid_value(const ParamSpec& p, std::size_t g, std::size_t points) {
  if (points <= 1) return p.lo;
  return p.lo + (p.hi - p.lo) * static_cast<double>(g) / static_cast<double>(points - 1);
}

struct Probe {
  Case c;
  Verdict belief;
};

// Lexicographic: disagreements first, then how far the disagreeing
// reports sit on the wrong side of their decision boundary.
struct LocalError {
  std::size_t disagreements = 0;
  double margin = 0.0;

  bool operator<(const LocalError& o) const {
    return std::tie(disagreements, margin) < std::tie(o.disagreements, o.margin);
  }
};

LocalError local_error(const UisSystem& sys, const std::vector<Probe>& log) {
  LocalError e;
  for (const auto& p : log) {
    const auto r = try_infer(sys, p.c);
    if (!r) {
      ++e.disagreements;
      e.margin += 1.0;
      continue;
    }
    if (r->verdict != p.belief) {
      ++e.disagreements;
      e.margin += std::abs(decision_margin(*r));
    }
  }
  return e;
}

std::vector<Case> draw_cases(const ContingencyTable& table, const ReadingModel& readings,
                             std::size_t n, Rng& rng) {
  std::vector<Case> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(sample_case(table, readings, rng));
  return out;
}

}  // namespace

double system_accuracy(const UisSystem& sys, const std::vector<Case>& cases) {
  if (cases.empty()) return 0.0;
  std::size_t correct = 0;
  for (const auto& c : cases) {
    const auto r = try_infer(sys, c);
    if (r && r->verdict == truth_of(c)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(cases.size());
}

TuneResult tune_search(const AgentProfile& profile, const ContingencyTable& table,
                       const ReadingModel& readings, std::size_t validation_n, Rng& rng,
                       const TuneOptions& options) {
  if (validation_n < 100) {
    throw Error("invalid_argument", "validation_n must be >= 100", "validation_n");
  }
  UisSystem best = honest_parameters(profile, table, readings);
  const std::vector<Case> validation = draw_cases(table, readings, validation_n, rng);
  const std::vector<ParamSpec> params = tunable_parameters(best, readings);

  TuneResult result;
  double best_accuracy = system_accuracy(best, validation);
  result.sweep_accuracy.push_back(best_accuracy);
  for (std::size_t sweep = 0; sweep < options.sweeps; ++sweep) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      for (std::size_t g = 0; g < options.grid_points; ++g) {
        UisSystem candidate = best;
        set_parameter(candidate, i, grid_value(params[i], g, options.grid_points));
        if (!validate(candidate).empty()) continue;
        ++result.trials_used;
        const double acc = system_accuracy(candidate, validation);
        if (acc > best_accuracy) {
          best_accuracy = acc;
          best = std::move(candidate);
        }
      }
    }
    result.sweep_accuracy.push_back(best_accuracy);
  }
  result.system = std::move(best);
  result.satisfied = true;
  result.final_accuracy = best_accuracy;
  return result;
}

TuneResult tune_iteratively(const AgentProfile& profile, const ContingencyTable& table,
                            const ReadingModel& readings, std::size_t max_trials, Rng& rng,
                            const TuneOptions& options) {
  if (max_trials < 1) throw Error("invalid_argument", "max_trials must be >= 1", "max_trials");
  UisSystem system = honest_parameters(profile, table, readings);
  const ContingencyTable belief = agent_belief_table(profile, table);
  const std::vector<ParamSpec> params = tunable_parameters(system, readings);

  TuneResult result;
  std::vector<Probe> log;
  std::size_t run = 0;
  while (result.trials_used < max_trials) {
    const Case c = sample_case(table, readings, rng);
    ++result.trials_used;
    const Verdict agent = oracle_verdict(belief, readings, c.temperature, c.pressure);
    log.push_back({c, agent});
    const auto r = try_infer(system, c);
    if (r && r->verdict == agent) {
      if (++run >= options.satisfaction_run) {
        result.satisfied = true;
        break;
      }
      continue;
    }
    run = 0;

    // Try one grid step up and down on every parameter; each re-test is a
    // trial. Keep the single adjustment that most lowers the local error.
    LocalError best_error = local_error(system, log);
    std::optional<UisSystem> best;
    for (std::size_t i = 0; i < params.size() && result.trials_used < max_trials; ++i) {
      const double step = (params[i].hi - params[i].lo) /
                          static_cast<double>(std::max<std::size_t>(options.grid_points, 2) - 1);
      for (double dir : {-1.0, 1.0}) {
        if (result.trials_used >= max_trials) break;
        const double v = get_parameter(system, i) + dir * step;
        if (v < params[i].lo - 1e-12 || v > params[i].hi + 1e-12) continue;
        UisSystem candidate = system;
        set_parameter(candidate, i, std::clamp(v, params[i].lo, params[i].hi));
        if (!validate(candidate).empty()) continue;
        ++result.trials_used;
        const LocalError e = local_error(candidate, log);
        if (e < best_error) {
          best_error = e;
          best = std::move(candidate);
        }
      }
    }
    if (best) system = std::move(*best);
  }

  const std::vector<Case> evaluation = draw_cases(table, readings, options.evaluation_n, rng);
  result.final_accuracy = system_accuracy(system, evaluation);
  result.system = std::move(system);
  return result;
}

}  // namespace uisbench
