#include "uisbench/engines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>

namespace uisbench {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

bool in_range(double v, double lo, double hi) { return std::isfinite(v) && v >= lo && v <= hi; }

}  // namespace

std::string_view to_string(EngineKind k) {
  switch (k) {
    case EngineKind::kEmycin: return "emycin";
    case EngineKind::kProspector: return "prospector";
    case EngineKind::kIndependence: return "independence";
    case EngineKind::kRegression: return "regression";
    case EngineKind::kFuzzy: return "fuzzy";
    case EngineKind::kDempsterShafer: return "dempster_shafer";
  }
  return "unknown";
}

EngineKind engine_kind_from_string(std::string_view s) {
  for (EngineKind k : kAllEngines) {
    if (to_string(k) == s) return k;
  }
  throw Error("validation_error", "unknown engine kind \"" + std::string(s) + "\"", "kind");
}

std::string_view to_string(Antecedent a) {
  switch (a) {
    case Antecedent::kE1: return "E1";
    case Antecedent::kE2: return "E2";
    case Antecedent::kAnd: return "E1_AND_E2";
    case Antecedent::kOr: return "E1_OR_E2";
  }
  return "unknown";
}

Antecedent antecedent_from_string(std::string_view s) {
  for (Antecedent a : {Antecedent::kE1, Antecedent::kE2, Antecedent::kAnd, Antecedent::kOr}) {
    if (to_string(a) == s) return a;
  }
  throw Error("validation_error", "unknown antecedent \"" + std::string(s) + "\"", "antecedent");
}

std::string_view to_string(Scale s) {
  switch (s) {
    case Scale::kCf: return "cf";
    case Scale::kProbability: return "probability";
    case Scale::kPosteriorWithPrior: return "posterior_with_prior";
    case Scale::kBeliefPair: return "belief_pair";
    case Scale::kMembershipDegree: return "membership_degree";
  }
  return "unknown";
}

Verdict verdict_for(const BeliefReport& r) {
  switch (r.scale) {
    case Scale::kCf:
      return r.value > 0.0 ? Verdict::kMalfunction : Verdict::kWorking;
    case Scale::kBeliefPair:
      return r.value > r.belief_working.value_or(0.0) ? Verdict::kMalfunction : Verdict::kWorking;
    case Scale::kProbability:
    case Scale::kPosteriorWithPrior:
    case Scale::kMembershipDegree:
      return r.value >= 0.5 ? Verdict::kMalfunction : Verdict::kWorking;
  }
  return Verdict::kWorking;
}

double decision_margin(const BeliefReport& r) {
  switch (r.scale) {
    case Scale::kCf: return r.value;
    case Scale::kBeliefPair: return r.value - r.belief_working.value_or(0.0);
    default: return r.value - 0.5;
  }
}

double ramp_eval(const RampInterpreter& r, double reading) {
  if (reading <= r.lo) return 0.0;
  if (reading >= r.hi) return 1.0;
  return (reading - r.lo) / (r.hi - r.lo);
}

namespace {

struct Certainties {
  double e1;
  double e2;
};

Certainties certainties(const EvidenceRamps& ramps, Readings r) {
  return {ramp_eval(ramps.temperature, r.temperature), ramp_eval(ramps.pressure, r.pressure)};
}

double antecedent_value(Antecedent a, double e1, double e2) {
  switch (a) {
    case Antecedent::kE1: return e1;
    case Antecedent::kE2: return e2;
    case Antecedent::kAnd: return std::min(e1, e2);
    case Antecedent::kOr: return std::max(e1, e2);
  }
  return 0.0;
}

BeliefReport finish(BeliefReport r) {
  r.verdict = verdict_for(r);
  return r;
}

}  // namespace

// ---------------------------------------------------------------------------
// EMYCIN
// ---------------------------------------------------------------------------

double emycin_combine(double x, double y) {
  if ((x == 1.0 && y == -1.0) || (x == -1.0 && y == 1.0)) {
    throw Error("undefined_combination", "certainty factors +1 and -1 cannot be combined");
  }
  if (x >= 0.0 && y >= 0.0) return x + y * (1.0 - x);
  if (x <= 0.0 && y <= 0.0) return x + y * (1.0 + x);
  return (x + y) / (1.0 - std::min(std::abs(x), std::abs(y)));
}

BeliefReport emycin_infer(const EmycinSystem& sys, Readings r) {
  const Certainties c = certainties(sys.ramps, r);
  const double cf1 = cf_from_certainty(c.e1);
  const double cf2 = cf_from_certainty(c.e2);
  double total = 0.0;
  for (const auto& rule : sys.rules) {
    const double ante = antecedent_value(rule.antecedent, cf1, cf2);
    if (ante <= sys.activation_threshold) continue;
    total = emycin_combine(total, rule.cf * std::max(0.0, ante));
  }
  BeliefReport out;
  out.scale = Scale::kCf;
  out.value = total;
  return finish(out);
}

// ---------------------------------------------------------------------------
// PROSPECTOR
// ---------------------------------------------------------------------------

double prospector_rule_posterior(const ProspectorRule& rule, double prior_conclusion,
                                 double evidence_certainty) {
  if (!(prior_conclusion > 0.0 && prior_conclusion < 1.0)) {
    throw Error("degenerate_prior", "conclusion prior must lie strictly between 0 and 1");
  }
  const double odds = probability_to_odds(prior_conclusion);
  const double p_given_e = odds_to_probability(scale_to_ratio(rule.ls_scale) * odds);
  const double p_given_not_e = odds_to_probability(scale_to_ratio(rule.ln_scale) * odds);
  const double pe = odds_to_probability(scale_to_ratio(rule.prior_evidence_scale));
  const double c = std::clamp(evidence_certainty, 0.0, 1.0);
  if (c == pe) return prior_conclusion;
  if (c < pe) return p_given_not_e + (prior_conclusion - p_given_not_e) * (c / pe);
  return prior_conclusion + (p_given_e - prior_conclusion) * ((c - pe) / (1.0 - pe));
}

BeliefReport prospector_infer(const ProspectorSystem& sys, Readings r) {
  const Certainties c = certainties(sys.ramps, r);
  const double prior_odds = scale_to_ratio(sys.conclusion_prior_scale);
  const double prior = odds_to_probability(prior_odds);
  double odds = prior_odds;
  for (const auto& rule : sys.rules) {
    const double certainty = antecedent_value(rule.antecedent, c.e1, c.e2);
    const double post = prospector_rule_posterior(rule, prior, certainty);
    odds *= probability_to_odds(post) / prior_odds;
  }
  BeliefReport out;
  out.scale = Scale::kPosteriorWithPrior;
  out.value = std::isinf(odds) ? 1.0 : odds_to_probability(odds);
  out.prior = prior;
  return finish(out);
}

std::vector<std::string> prospector_warnings(const ProspectorSystem& sys) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < sys.rules.size(); ++i) {
    const auto& rule = sys.rules[i];
    if (rule.ls_scale != 0.0 && rule.ln_scale != 0.0 &&
        std::signbit(rule.ls_scale) == std::signbit(rule.ln_scale)) {
      out.push_back("rules[" + std::to_string(i) +
                    "]: LS and LN move belief the same way; presence and absence of the "
                    "evidence should pull in opposite directions");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Independence / regression
// ---------------------------------------------------------------------------

double independence_probability(const IndependenceParams& p, double p1, double p2) {
  return (1.0 - p1) * (1.0 - p2) * p.p_nn + (1.0 - p1) * p2 * p.p_nh + p1 * (1.0 - p2) * p.p_hn +
         p1 * p2 * p.p_hh;
}

BeliefReport independence_infer(const IndependenceSystem& sys, Readings r) {
  const Certainties c = certainties(sys.ramps, r);
  BeliefReport out;
  out.scale = Scale::kProbability;
  out.value = independence_probability(sys.params, c.e1, c.e2);
  return finish(out);
}

BeliefReport regression_infer(const RegressionSystem& sys, Readings r) {
  const Certainties c = certainties(sys.ramps, r);
  const double raw = sys.params.a + sys.params.b1 * c.e1 + sys.params.b2 * c.e2;
  BeliefReport out;
  out.scale = Scale::kProbability;
  out.value = std::clamp(raw, 0.0, 1.0);
  out.raw = raw;
  return finish(out);
}

// ---------------------------------------------------------------------------
// Fuzzy
// ---------------------------------------------------------------------------

namespace {

enum class Band { kAbsent, kPresent, kUncertain };

struct Segment {
  Interval iv;
  Band band;
};

// Empty string when valid.
std::string membership_problem(const FuzzyMembership& m) {
  const std::pair<const char*, const Interval*> all[] = {{"absent", &m.absent},
                                                         {"present", &m.present},
                                                         {"uncertain1", &m.uncertain1},
                                                         {"uncertain2", &m.uncertain2}};
  for (const auto& [name, iv] : all) {
    if (!std::isfinite(iv->lo) || !std::isfinite(iv->hi)) return std::string(name) + ": not finite";
    if (iv->lo > iv->hi) return std::string(name) + ": lo must not exceed hi";
  }
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = i + 1; j < 4; ++j) {
      const Interval& a = *all[i].second;
      const Interval& b = *all[j].second;
      // Touching endpoints are allowed; shared interior is not. A
      // zero-width interval strictly inside another also overlaps.
      const bool overlap = std::max(a.lo, b.lo) < std::min(a.hi, b.hi) ||
                           (a.lo == a.hi && b.lo < a.lo && a.lo < b.hi) ||
                           (b.lo == b.hi && a.lo < b.lo && b.lo < a.hi);
      if (overlap) {
        return std::string(all[i].first) + " overlaps " + all[j].first;
      }
    }
  }
  if (m.absent.hi == m.present.lo || m.present.hi == m.absent.lo) {
    return "absent and present must not share an endpoint";
  }
  return {};
}

double level_of(Band b) { return b == Band::kPresent ? 1.0 : 0.0; }

// Ramp across the uncertain segments of one stretch, flat over gaps.
double stretch_value(std::span<const Segment> segs, double x, double start, double end) {
  double total = 0.0;
  double covered = 0.0;
  for (const auto& s : segs) {
    if (s.band != Band::kUncertain) continue;
    const double width = s.iv.hi - s.iv.lo;
    total += width;
    covered += std::clamp(x - s.iv.lo, 0.0, width);
  }
  if (total <= 0.0) return std::numeric_limits<double>::quiet_NaN();
  return start + (end - start) * (covered / total);
}

}  // namespace

double fuzzy_membership(const FuzzyMembership& m, double reading) {
  if (const std::string problem = membership_problem(m); !problem.empty()) {
    throw Error("invalid_membership", problem);
  }
  std::array<Segment, 4> segs = {Segment{m.absent, Band::kAbsent},
                                 Segment{m.present, Band::kPresent},
                                 Segment{m.uncertain1, Band::kUncertain},
                                 Segment{m.uncertain2, Band::kUncertain}};
  std::sort(segs.begin(), segs.end(), [](const Segment& a, const Segment& b) {
    return a.iv.lo != b.iv.lo ? a.iv.lo < b.iv.lo : a.iv.hi < b.iv.hi;
  });

  for (const auto& s : segs) {
    if (s.band != Band::kUncertain && reading >= s.iv.lo && reading <= s.iv.hi) {
      return level_of(s.band);
    }
  }

  std::size_t first = 4;
  std::size_t second = 4;
  for (std::size_t i = 0; i < 4; ++i) {
    if (segs[i].band == Band::kUncertain) continue;
    (first == 4 ? first : second) = i;
  }
  const double first_level = level_of(segs[first].band);
  const double second_level = level_of(segs[second].band);
  const std::span<const Segment> all(segs);

  if (reading < segs[first].iv.lo) {
    const double v = stretch_value(all.first(first), reading, 1.0 - first_level, first_level);
    return std::isnan(v) ? first_level : v;
  }
  if (reading > segs[second].iv.hi) {
    const double v =
        stretch_value(all.subspan(second + 1), reading, second_level, 1.0 - second_level);
    return std::isnan(v) ? second_level : v;
  }
  const double v = stretch_value(all.subspan(first + 1, second - first - 1), reading, first_level,
                                 second_level);
  if (!std::isnan(v)) return v;
  // No uncertain width between the definite intervals: nearest boundary.
  return reading - segs[first].iv.hi <= segs[second].iv.lo - reading ? first_level : second_level;
}

BeliefReport fuzzy_infer(const FuzzySystem& sys, Readings r) {
  const double mu1 = fuzzy_membership(sys.temperature, r.temperature);
  const double mu2 = fuzzy_membership(sys.pressure, r.pressure);
  double degree = 0.0;
  for (const auto& rule : sys.rules) {
    degree = std::max(degree, antecedent_value(rule.antecedent, mu1, mu2) * rule.strength);
  }
  BeliefReport out;
  out.scale = Scale::kMembershipDegree;
  out.value = degree;
  return finish(out);
}

// ---------------------------------------------------------------------------
// Dempster-Shafer
// ---------------------------------------------------------------------------

MassFunction2 simple_support(Verdict focus, double s) {
  MassFunction2 m;
  (focus == Verdict::kMalfunction ? m.m_m : m.m_w) = s;
  m.m_theta = 1.0 - s;
  return m;
}

MassFunction2 ds_support_from_reading(const SupportFunction& f, double reading) {
  const auto& r = f.anchors;
  double signed_support;
  if (reading <= r.front()) {
    signed_support = kAnchorSupport.front();
  } else if (reading >= r.back()) {
    signed_support = kAnchorSupport.back();
  } else {
    std::size_t k = 0;
    while (reading > r[k + 1]) ++k;
    const double t = (reading - r[k]) / (r[k + 1] - r[k]);
    signed_support = kAnchorSupport[k] + t * (kAnchorSupport[k + 1] - kAnchorSupport[k]);
  }
  if (signed_support > 0.0) return simple_support(Verdict::kMalfunction, signed_support);
  if (signed_support < 0.0) return simple_support(Verdict::kWorking, -signed_support);
  return vacuous_mass();
}

MassFunction2 ds_combine(const MassFunction2& a, const MassFunction2& b) {
  if (b == vacuous_mass()) return a;
  if (a == vacuous_mass()) return b;
  // Same focus: no conflict, and the focal mass is 1 - prod(1 - s_i).
  if (a.m_w == 0.0 && b.m_w == 0.0) return {0.0, 1.0 - a.m_theta * b.m_theta, a.m_theta * b.m_theta};
  if (a.m_m == 0.0 && b.m_m == 0.0) return {1.0 - a.m_theta * b.m_theta, 0.0, a.m_theta * b.m_theta};
  const double conflict = a.m_w * b.m_m + a.m_m * b.m_w;
  const double norm = 1.0 - conflict;
  if (!(norm > 0.0)) {
    throw Error("total_conflict", "evidence is in total conflict; Dempster's rule is undefined");
  }
  MassFunction2 out;
  // Cross terms summed first so that swapping the operands is bit-exact.
  out.m_w = (a.m_w * b.m_w + (a.m_w * b.m_theta + a.m_theta * b.m_w)) / norm;
  out.m_m = (a.m_m * b.m_m + (a.m_m * b.m_theta + a.m_theta * b.m_m)) / norm;
  out.m_theta = (a.m_theta * b.m_theta) / norm;
  return out;
}

BeliefReport ds_infer(const DsSystem& sys, Readings r) {
  const MassFunction2 m = ds_combine(ds_support_from_reading(sys.temperature, r.temperature),
                                     ds_support_from_reading(sys.pressure, r.pressure));
  BeliefReport out;
  out.scale = Scale::kBeliefPair;
  out.value = m.m_m;
  out.belief_working = m.m_w;
  return finish(out);
}

// ---------------------------------------------------------------------------
// Dispatch and validation
// ---------------------------------------------------------------------------

EngineKind kind_of(const UisSystem& sys) {
  return std::visit(Overloaded{
                        [](const EmycinSystem&) { return EngineKind::kEmycin; },
                        [](const ProspectorSystem&) { return EngineKind::kProspector; },
                        [](const IndependenceSystem&) { return EngineKind::kIndependence; },
                        [](const RegressionSystem&) { return EngineKind::kRegression; },
                        [](const FuzzySystem&) { return EngineKind::kFuzzy; },
                        [](const DsSystem&) { return EngineKind::kDempsterShafer; },
                    },
                    sys);
}

namespace {

void check(std::vector<FieldError>& errs, bool ok, std::string field, std::string message) {
  if (!ok) errs.push_back({std::move(field), std::move(message)});
}

void check_ramps(std::vector<FieldError>& errs, const EvidenceRamps& r) {
  const std::pair<const char*, const RampInterpreter*> all[] = {{"ramps.temperature", &r.temperature},
                                                                {"ramps.pressure", &r.pressure}};
  for (const auto& [name, ramp] : all) {
    check(errs, std::isfinite(ramp->lo) && std::isfinite(ramp->hi) && ramp->lo < ramp->hi,
          name, "ramp needs finite lo < hi");
  }
}

void check_nonempty(std::vector<FieldError>& errs, bool nonempty) {
  check(errs, nonempty, "rules", "at least one rule is required");
}

std::string rule_field(std::size_t i, const char* member) {
  return "rules[" + std::to_string(i) + "]." + member;
}

}  // namespace

std::vector<FieldError> validate(const UisSystem& sys) {
  std::vector<FieldError> errs;
  std::visit(
      Overloaded{
          [&](const EmycinSystem& s) {
            check_nonempty(errs, !s.rules.empty());
            for (std::size_t i = 0; i < s.rules.size(); ++i) {
              check(errs, in_range(s.rules[i].cf, -1.0, 1.0), rule_field(i, "cf"),
                    "cf must lie in [-1, 1]");
            }
            check(errs, in_range(s.activation_threshold, 0.0, 1.0), "activation_threshold",
                  "threshold must lie in [0, 1]");
            check_ramps(errs, s.ramps);
          },
          [&](const ProspectorSystem& s) {
            check_nonempty(errs, !s.rules.empty());
            const double rs = kProspectorRatioScale;
            const double ps = kProspectorPriorScale;
            for (std::size_t i = 0; i < s.rules.size(); ++i) {
              const auto& r = s.rules[i];
              check(errs, in_range(r.ls_scale, -rs, rs), rule_field(i, "ls_scale"),
                    "LS scale must lie in [-6, 6]");
              check(errs, in_range(r.ln_scale, -rs, rs), rule_field(i, "ln_scale"),
                    "LN scale must lie in [-6, 6]");
              check(errs, in_range(r.prior_evidence_scale, -ps, ps),
                    rule_field(i, "prior_evidence_scale"), "prior odds scale must lie in [-4, 4]");
            }
            check(errs, in_range(s.conclusion_prior_scale, -ps, ps), "conclusion_prior_scale",
                  "prior odds scale must lie in [-4, 4]");
            check_ramps(errs, s.ramps);
          },
          [&](const IndependenceSystem& s) {
            const std::pair<const char*, double> all[] = {{"params.p_nn", s.params.p_nn},
                                                          {"params.p_nh", s.params.p_nh},
                                                          {"params.p_hn", s.params.p_hn},
                                                          {"params.p_hh", s.params.p_hh}};
            for (const auto& [name, v] : all) {
              check(errs, in_range(v, 0.0, 1.0), name, "probability must lie in [0, 1]");
            }
            check_ramps(errs, s.ramps);
          },
          [&](const RegressionSystem& s) {
            check(errs, in_range(s.params.a, 0.0, 1.0), "params.a", "intercept must lie in [0, 1]");
            check(errs, in_range(s.params.b1, -1.0, 1.0), "params.b1", "weight must lie in [-1, 1]");
            check(errs, in_range(s.params.b2, -1.0, 1.0), "params.b2", "weight must lie in [-1, 1]");
            check_ramps(errs, s.ramps);
          },
          [&](const FuzzySystem& s) {
            check_nonempty(errs, !s.rules.empty());
            for (std::size_t i = 0; i < s.rules.size(); ++i) {
              check(errs, s.rules[i].antecedent != Antecedent::kOr, rule_field(i, "antecedent"),
                    "fuzzy rules are simple or conjunctive");
              check(errs, in_range(s.rules[i].strength, 0.0, 1.0), rule_field(i, "strength"),
                    "strength must lie in [0, 1]");
            }
            const std::string t = membership_problem(s.temperature);
            check(errs, t.empty(), "temperature", t);
            const std::string p = membership_problem(s.pressure);
            check(errs, p.empty(), "pressure", p);
          },
          [&](const DsSystem& s) {
            const std::pair<const char*, const SupportFunction*> all[] = {
                {"temperature.anchors", &s.temperature}, {"pressure.anchors", &s.pressure}};
            for (const auto& [name, f] : all) {
              bool ok = std::all_of(f->anchors.begin(), f->anchors.end(),
                                    [](double v) { return std::isfinite(v); });
              for (std::size_t i = 0; ok && i + 1 < f->anchors.size(); ++i) {
                ok = f->anchors[i] < f->anchors[i + 1];
              }
              check(errs, ok, name, "anchors must be finite and strictly increasing");
            }
          },
      },
      sys);
  return errs;
}

void ensure_valid(const UisSystem& sys) {
  const auto errs = validate(sys);
  if (!errs.empty()) throw Error("validation_error", errs.front().message, errs.front().field);
}

BeliefReport infer(const UisSystem& sys, Readings r) {
  return std::visit(Overloaded{
                        [&](const EmycinSystem& s) { return emycin_infer(s, r); },
                        [&](const ProspectorSystem& s) { return prospector_infer(s, r); },
                        [&](const IndependenceSystem& s) { return independence_infer(s, r); },
                        [&](const RegressionSystem& s) { return regression_infer(s, r); },
                        [&](const FuzzySystem& s) { return fuzzy_infer(s, r); },
                        [&](const DsSystem& s) { return ds_infer(s, r); },
                    },
                    sys);
}

}  // namespace uisbench
