#pragma once

// Diagnostic micro-domain: a machine is working or malfunctioning; the
// evidence is a temperature reading (E1 = abnormally high) and a pressure
// reading (E2 = abnormally high). Cases are drawn from an 8-cell joint
// table and Gaussian reading models.

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "uisbench/common.hpp"

namespace uisbench {

struct CellLabel {
  bool e1_high = false;
  bool e2_high = false;
  bool malfunction = false;

  friend bool operator==(const CellLabel&, const CellLabel&) = default;
};

/// Index in [0, 8): bit 2 = e1_high, bit 1 = e2_high, bit 0 = malfunction.
constexpr std::size_t cell_index(CellLabel c) {
  return (c.e1_high ? 4u : 0u) + (c.e2_high ? 2u : 0u) + (c.malfunction ? 1u : 0u);
}
constexpr CellLabel cell_from_index(std::size_t i) {
  return CellLabel{(i & 4u) != 0, (i & 2u) != 0, (i & 1u) != 0};
}

class ContingencyTable {
 public:
  /// Validates: entries finite and >= 0, sum 1 within 1e-12.
  explicit ContingencyTable(const std::array<double, 8>& joint);

  double joint(CellLabel c) const { return joint_[cell_index(c)]; }
  const std::array<double, 8>& cells() const { return joint_; }

  /// P(e1, e2) marginalised over the conclusion.
  double evidence_probability(bool e1_high, bool e2_high) const;
  /// P(C | e1, e2). Throws Error("degenerate_table") if P(e1, e2) == 0.
  double p_malfunction_given(bool e1_high, bool e2_high) const;

  double p_malfunction() const;
  double p_e1() const;
  double p_e2() const;

 private:
  std::array<double, 8> joint_;
};

struct Gaussian {
  double mean = 0.0;
  double sd = 1.0;

  double density(double x) const;
};

struct ReadingModel {
  Gaussian normal_temp;
  Gaussian high_temp;
  Gaussian normal_pressure;
  Gaussian high_pressure;

  /// Throws Error("validation_error") unless every sd is finite and > 0.
  void validate() const;
  const Gaussian& temperature(bool high) const { return high ? high_temp : normal_temp; }
  const Gaussian& pressure(bool high) const { return high ? high_pressure : normal_pressure; }
};

struct Case {
  double temperature = 0.0;
  double pressure = 0.0;
  CellLabel cell;
};

struct TrialRecord {
  Case c;
  Verdict answer = Verdict::kWorking;
  bool correct = false;
  std::size_t trial_index = 0;
};

/// Ground-truth verdict of the cell that generated a case.
inline Verdict truth_of(const Case& c) {
  return c.cell.malfunction ? Verdict::kMalfunction : Verdict::kWorking;
}
TrialRecord make_record(const Case& c, Verdict answer, std::size_t trial_index);

ContingencyTable default_table();
ReadingModel default_readings();

/// Draws the cell from the joint table, then each reading from the
/// Gaussian the cell selects.
Case sample_case(const ContingencyTable& table, const ReadingModel& readings, Rng& rng);

/// P(C | t, p) by summing joint(cell) * phi_t(cell) * phi_p(cell) over all
/// eight cells. Throws Error("unrepresentable_reading") when the density
/// sum underflows to zero or is not finite.
double exact_posterior(const ContingencyTable& table, const ReadingModel& readings,
                       double temperature, double pressure);

inline Verdict oracle_verdict(const ContingencyTable& table, const ReadingModel& readings,
                              double temperature, double pressure) {
  return exact_posterior(table, readings, temperature, pressure) >= 0.5 ? Verdict::kMalfunction
                                                                        : Verdict::kWorking;
}

/// Monte Carlo accuracy of "answer M iff exact_posterior >= 0.5" against
/// the generating cell.
double bayes_optimal_accuracy(const ContingencyTable& table, const ReadingModel& readings,
                              std::size_t n, Rng& rng);

inline constexpr std::size_t kCriterionWindow = 20;
inline constexpr std::size_t kCriterionCorrect = 17;
inline constexpr std::size_t kLearningTrialCap = 500;

/// True iff at least 20 records exist and the last 20 hold >= 17 correct.
bool criterion_met(std::span<const TrialRecord> history);

/// Display rounding (one decimal). Internal math never uses it.
double display_reading(double value);

// Config document: {"joint": {"000": p, ..., "111": p},
//                   "readings": {"normal_temp": {"mean": m, "sd": s}, ...}}
// where the joint key digits are e1, e2, c. Missing keys keep defaults.
nlohmann::json domain_to_json(const ContingencyTable& table, const ReadingModel& readings);
ContingencyTable table_from_json(const nlohmann::json& j);
ReadingModel readings_from_json(const nlohmann::json& j);

}  // namespace uisbench
