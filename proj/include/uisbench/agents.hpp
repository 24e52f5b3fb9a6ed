#pragma once

// Synthetic experts. An agent estimates the probabilities each engine asks
// for (optionally with Gaussian estimation error), translates them into the
// engine's native parameters, and then tunes the result either with an
// offline grid search or with the probe-and-adjust loop a participant runs.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "uisbench/domain.hpp"
#include "uisbench/engines.hpp"

namespace uisbench {

struct NoiseSpec {
  double sigma = 0.0;
  std::uint64_t seed = 0;
};

inline constexpr double kNoisedProbabilityMin = 0.01;
inline constexpr double kNoisedProbabilityMax = 0.99;

struct AgentProfile {
  EngineKind engine = EngineKind::kIndependence;
  NoiseSpec noise;
  // Antecedent forms the agent writes rules for (EMYCIN, PROSPECTOR, fuzzy).
  std::vector<Antecedent> vocabulary = {Antecedent::kE1, Antecedent::kE2, Antecedent::kAnd};
};

/// Throws Error("validation_error") for sigma < 0 or an unusable vocabulary.
void validate_profile(const AgentProfile& profile);

struct TuneOptions {
  std::size_t grid_points = 21;
  std::size_t sweeps = 3;
  // Consecutive agreeing probes that end iterative tuning.
  std::size_t satisfaction_run = 5;
  // Cases used to score the final system of tune_iteratively.
  std::size_t evaluation_n = 1000;
};

struct TuneResult {
  UisSystem system;
  std::size_t trials_used = 0;
  bool satisfied = false;
  double final_accuracy = 0.0;
  // tune_search: accuracy of the incumbent before the first sweep and
  // after each sweep.
  std::vector<double> sweep_accuracy;
};

/// The agent's internal model of the domain: the four conditionals
/// P(C | e1, e2) perturbed by the profile noise (evidence marginals kept).
ContingencyTable agent_belief_table(const AgentProfile& profile, const ContingencyTable& table);

/// Translates (noised) domain probabilities into the engine's parameters.
/// Throws Error("degenerate_table") when a needed conditioning event has
/// zero probability.
UisSystem honest_parameters(const AgentProfile& profile, const ContingencyTable& table,
                            const ReadingModel& readings);

struct ParamSpec {
  std::string name;
  double lo = 0.0;
  double hi = 1.0;
};

/// The engine's tunable parameters with their legal ranges. Reading-valued
/// parameters range over [normal mean - 4 sd, high mean + 4 sd].
std::vector<ParamSpec> tunable_parameters(const UisSystem& sys, const ReadingModel& readings);
double get_parameter(const UisSystem& sys, std::size_t index);
void set_parameter(UisSystem& sys, std::size_t index, double value);

/// Proportion of cases whose engine verdict matches the generating cell.
/// An inference error counts as a wrong answer.
double system_accuracy(const UisSystem& sys, const std::vector<Case>& cases);

/// Coordinate descent from the honest start, scanning each parameter over
/// a grid across its legal range and keeping strict improvements only.
TuneResult tune_search(const AgentProfile& profile, const ContingencyTable& table,
                       const ReadingModel& readings, std::size_t validation_n, Rng& rng,
                       const TuneOptions& options = {});

/// Probe-and-adjust loop. Every system run counts as a trial: the probe
/// itself and each one-step re-test made while choosing an adjustment.
TuneResult tune_iteratively(const AgentProfile& profile, const ContingencyTable& table,
                            const ReadingModel& readings, std::size_t max_trials, Rng& rng,
                            const TuneOptions& options = {});

}  // namespace uisbench
