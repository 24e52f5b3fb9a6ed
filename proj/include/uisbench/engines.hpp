#pragma once

// The six uncertain inference systems behind one inference interface.
// Every engine turns the two readings into engine-native evidence
// certainties, combines them with its own calculus, and returns a
// BeliefReport whose verdict is a pure function of the reported values.

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "uisbench/common.hpp"

namespace uisbench {

enum class EngineKind { kEmycin, kProspector, kIndependence, kRegression, kFuzzy, kDempsterShafer };

inline constexpr std::array<EngineKind, 6> kAllEngines = {
    EngineKind::kEmycin,     EngineKind::kProspector, EngineKind::kIndependence,
    EngineKind::kRegression, EngineKind::kFuzzy,      EngineKind::kDempsterShafer};

std::string_view to_string(EngineKind k);
/// Accepts the tags produced by to_string ("emycin", "prospector",
/// "independence", "regression", "fuzzy", "dempster_shafer").
EngineKind engine_kind_from_string(std::string_view s);

enum class Antecedent { kE1, kE2, kAnd, kOr };

std::string_view to_string(Antecedent a);
Antecedent antecedent_from_string(std::string_view s);

struct Readings {
  double temperature = 0.0;
  double pressure = 0.0;
};

enum class Scale { kCf, kProbability, kPosteriorWithPrior, kBeliefPair, kMembershipDegree };

std::string_view to_string(Scale s);

struct BeliefReport {
  Scale scale = Scale::kProbability;
  // cf, probability, posterior, membership degree, or Bel(M) for kBeliefPair.
  double value = 0.0;
  std::optional<double> prior;           // kPosteriorWithPrior
  std::optional<double> raw;             // regression before clamping
  std::optional<double> belief_working;  // kBeliefPair: Bel(W)
  Verdict verdict = Verdict::kWorking;

  friend bool operator==(const BeliefReport&, const BeliefReport&) = default;
};

/// cf > 0 -> M; probabilities and degrees >= 0.5 -> M; belief pair
/// Bel(M) > Bel(W) -> M. Everything else is W.
Verdict verdict_for(const BeliefReport& r);

/// Signed distance from the report's decision boundary (positive leans M).
double decision_margin(const BeliefReport& r);

// ---------------------------------------------------------------------------
// Reading interpretation shared by the rule/probability engines
// ---------------------------------------------------------------------------

struct RampInterpreter {
  double lo = 0.0;
  double hi = 1.0;

  friend bool operator==(const RampInterpreter&, const RampInterpreter&) = default;
};

/// 0 at or below lo, 1 at or above hi, linear between.
double ramp_eval(const RampInterpreter& r, double reading);
inline double cf_from_certainty(double certainty) { return 2.0 * certainty - 1.0; }

struct EvidenceRamps {
  RampInterpreter temperature;
  RampInterpreter pressure;

  friend bool operator==(const EvidenceRamps&, const EvidenceRamps&) = default;
};

// ---------------------------------------------------------------------------
// EMYCIN
// ---------------------------------------------------------------------------

struct EmycinRule {
  Antecedent antecedent = Antecedent::kE1;
  double cf = 0.0;

  friend bool operator==(const EmycinRule&, const EmycinRule&) = default;
};

struct EmycinSystem {
  std::vector<EmycinRule> rules;
  EvidenceRamps ramps;
  // A rule contributes only when its antecedent CF exceeds this value.
  double activation_threshold = 0.0;

  friend bool operator==(const EmycinSystem&, const EmycinSystem&) = default;
};

/// Parallel combination of two certainty factors. Throws
/// Error("undefined_combination") for the pair (1, -1) in either order.
double emycin_combine(double x, double y);
BeliefReport emycin_infer(const EmycinSystem& sys, Readings r);

// ---------------------------------------------------------------------------
// PROSPECTOR
// ---------------------------------------------------------------------------

inline constexpr double kProspectorRatioScale = 6.0;  // LS/LN in [-6, +6]
inline constexpr double kProspectorPriorScale = 4.0;  // prior odds in [-4, +4]

struct ProspectorRule {
  Antecedent antecedent = Antecedent::kE1;
  double ls_scale = 0.0;
  double ln_scale = 0.0;
  double prior_evidence_scale = 0.0;

  friend bool operator==(const ProspectorRule&, const ProspectorRule&) = default;
};

struct ProspectorSystem {
  std::vector<ProspectorRule> rules;
  double conclusion_prior_scale = 0.0;
  EvidenceRamps ramps;

  friend bool operator==(const ProspectorSystem&, const ProspectorSystem&) = default;
};

/// Scale value v maps to odds or likelihood ratio 10^v.
inline double scale_to_ratio(double v) { return std::pow(10.0, v); }
inline double odds_to_probability(double odds) { return odds / (1.0 + odds); }
inline double probability_to_odds(double p) { return p / (1.0 - p); }

/// Piecewise-linear interpolation of P(H | E') between P(H|~E), the prior
/// and P(H|E), with the breakpoint at the rule's prior evidence
/// probability. Throws Error("degenerate_prior") when the prior is 0 or 1.
double prospector_rule_posterior(const ProspectorRule& rule, double prior_conclusion,
                                 double evidence_certainty);
BeliefReport prospector_infer(const ProspectorSystem& sys, Readings r);

/// Non-fatal diagnostics (LS and LN pointing the same direction).
std::vector<std::string> prospector_warnings(const ProspectorSystem& sys);

// ---------------------------------------------------------------------------
// Independence and linear regression
// ---------------------------------------------------------------------------

struct IndependenceParams {
  double p_nn = 0.0;  // P(C | ~E1 & ~E2)
  double p_nh = 0.0;  // P(C | ~E1 &  E2)
  double p_hn = 0.0;  // P(C |  E1 & ~E2)
  double p_hh = 0.0;  // P(C |  E1 &  E2)

  friend bool operator==(const IndependenceParams&, const IndependenceParams&) = default;
};

struct IndependenceSystem {
  IndependenceParams params;
  EvidenceRamps ramps;

  friend bool operator==(const IndependenceSystem&, const IndependenceSystem&) = default;
};

/// P'(C) as the certainty-weighted mixture of the four conditionals.
double independence_probability(const IndependenceParams& p, double p1, double p2);
BeliefReport independence_infer(const IndependenceSystem& sys, Readings r);

struct RegressionParams {
  double a = 0.0;
  double b1 = 0.0;
  double b2 = 0.0;

  friend bool operator==(const RegressionParams&, const RegressionParams&) = default;
};

struct RegressionSystem {
  RegressionParams params;
  EvidenceRamps ramps;

  friend bool operator==(const RegressionSystem&, const RegressionSystem&) = default;
};

BeliefReport regression_infer(const RegressionSystem& sys, Readings r);

// ---------------------------------------------------------------------------
// Fuzzy sets
// ---------------------------------------------------------------------------

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Eight reading values per evidence source. Membership is 0 on `absent`,
/// 1 on `present`, and ramps across the uncertain intervals. Within each
/// stretch between (or beyond) the definite intervals the ramp is shared
/// across the uncertain intervals in proportion to their widths and is
/// flat over gaps. An uncertain interval beyond the outermost definite
/// interval ramps toward the opposite level (a trapezoid shoulder).
struct FuzzyMembership {
  Interval absent;
  Interval present;
  Interval uncertain1;
  Interval uncertain2;

  friend bool operator==(const FuzzyMembership&, const FuzzyMembership&) = default;
};

struct FuzzyRule {
  Antecedent antecedent = Antecedent::kE1;  // kOr is rejected
  double strength = 0.0;

  friend bool operator==(const FuzzyRule&, const FuzzyRule&) = default;
};

struct FuzzySystem {
  FuzzyMembership temperature;
  FuzzyMembership pressure;
  std::vector<FuzzyRule> rules;

  friend bool operator==(const FuzzySystem&, const FuzzySystem&) = default;
};

/// Throws Error("invalid_membership") when the membership is malformed.
double fuzzy_membership(const FuzzyMembership& m, double reading);
BeliefReport fuzzy_infer(const FuzzySystem& sys, Readings r);

// ---------------------------------------------------------------------------
// Dempster-Shafer
// ---------------------------------------------------------------------------

/// Reading anchors carrying (Bel(W), Bel(M)) = (0.999,0), (0.5,0), (0,0),
/// (0,0.5), (0,0.999) in that order.
struct SupportFunction {
  std::array<double, 5> anchors{};

  friend bool operator==(const SupportFunction&, const SupportFunction&) = default;
};

inline constexpr std::array<double, 5> kAnchorSupport = {-0.999, -0.5, 0.0, 0.5, 0.999};

struct MassFunction2 {
  double m_w = 0.0;
  double m_m = 0.0;
  double m_theta = 1.0;

  friend bool operator==(const MassFunction2&, const MassFunction2&) = default;
};

inline MassFunction2 vacuous_mass() { return {}; }
MassFunction2 simple_support(Verdict focus, double s);

struct DsSystem {
  SupportFunction temperature;
  SupportFunction pressure;

  friend bool operator==(const DsSystem&, const DsSystem&) = default;
};

MassFunction2 ds_support_from_reading(const SupportFunction& f, double reading);
/// Dempster's rule on the frame {W, M}. Throws Error("total_conflict")
/// when the conflict mass reaches 1.
MassFunction2 ds_combine(const MassFunction2& a, const MassFunction2& b);
BeliefReport ds_infer(const DsSystem& sys, Readings r);

// ---------------------------------------------------------------------------
// Uniform dispatch
// ---------------------------------------------------------------------------

using UisSystem = std::variant<EmycinSystem, ProspectorSystem, IndependenceSystem,
                               RegressionSystem, FuzzySystem, DsSystem>;

EngineKind kind_of(const UisSystem& sys);

struct FieldError {
  std::string field;
  std::string message;

  friend bool operator==(const FieldError&, const FieldError&) = default;
};

/// Every invariant violation of the active variant, one entry per field.
std::vector<FieldError> validate(const UisSystem& sys);
/// Throws Error("validation_error", ..., field) for the first violation.
void ensure_valid(const UisSystem& sys);

BeliefReport infer(const UisSystem& sys, Readings r);

}  // namespace uisbench
