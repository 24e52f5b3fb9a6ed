#pragma once

// Replication harness: agents x engines x test trials, accuracy by
// evidence type, one-way and split-plot ANOVA, and report rendering.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "uisbench/agents.hpp"
#include "uisbench/domain.hpp"
#include "uisbench/engines.hpp"

namespace uisbench {

inline constexpr std::string_view kVersion = "1.0.0";

enum class EvidenceType { kConsistent, kMixed };

std::string_view to_string(EvidenceType t);
EvidenceType evidence_type_from_string(std::string_view s);

/// Mixed iff exactly one reading was generated from its high distribution.
EvidenceType classify_trial(const Case& c);

struct ReplicationConfig {
  std::size_t agents_per_uis = 10;
  std::size_t test_trials = 30;
  double noise_sigma = 0.15;
  std::uint64_t seed = 1;
  std::vector<Antecedent> vocabulary = {Antecedent::kE1, Antecedent::kE2, Antecedent::kAnd};
  std::size_t max_tuning_trials = 500;
  std::vector<EngineKind> engines = {kAllEngines.begin(), kAllEngines.end()};
  ContingencyTable table = default_table();
  ReadingModel readings = default_readings();
  TuneOptions tuning;

  void validate() const;
};

nlohmann::json config_to_json(const ReplicationConfig& c);
/// Missing keys keep their defaults. Accepts the domain keys ("joint",
/// "readings") at the top level next to the experiment keys.
ReplicationConfig config_from_json(const nlohmann::json& j);

// Agent block of the config document:
// {"engine": "...", "sigma": s, "seed": n, "vocabulary": ["E1", ...]}
nlohmann::json profile_to_json(const AgentProfile& p);
AgentProfile profile_from_json(const nlohmann::json& j);

/// Each engine's parameters for the two mixed-evidence configurations,
/// rescaled to [0, 1].
struct MixedCaseParams {
  double normal_temp_high_pressure = 0.0;
  double high_temp_normal_pressure = 0.0;

  friend bool operator==(const MixedCaseParams&, const MixedCaseParams&) = default;
};

MixedCaseParams mixed_case_parameters(const UisSystem& sys);

struct SubjectResult {
  EngineKind engine = EngineKind::kIndependence;
  std::size_t subject = 0;
  std::vector<bool> correct;
  std::vector<EvidenceType> evidence;
  std::size_t trials_to_tune = 0;
  bool satisfied = false;
  MixedCaseParams mixed_params;

  friend bool operator==(const SubjectResult&, const SubjectResult&) = default;
};

/// The test cases every engine's subject `subject` is scored on.
std::vector<Case> subject_test_cases(const ReplicationConfig& config, std::size_t subject);

std::vector<SubjectResult> run_replication(const ReplicationConfig& config);

struct EngineAccuracy {
  EngineKind engine = EngineKind::kIndependence;
  std::size_t consistent_n = 0;
  std::size_t mixed_n = 0;
  std::optional<double> consistent;
  std::optional<double> mixed;
  double overall = 0.0;
};

/// Pooled proportion correct per engine and evidence type, in order of
/// first appearance.
std::vector<EngineAccuracy> accuracy_breakdown(const std::vector<SubjectResult>& results);

struct FStatistic {
  double value = 0.0;
  // Set when the error mean square is zero; value is then +infinity.
  bool infinite = false;
};

struct OneWayAnova {
  FStatistic f;
  long df_between = 0;
  long df_within = 0;
  double ss_between = 0.0;
  double ss_within = 0.0;
};

/// Needs >= 2 groups with >= 2 observations each.
OneWayAnova one_way_anova(const std::vector<std::vector<double>>& groups);

struct AnovaRow {
  std::string source;
  long df = 0;
  double ss = 0.0;
  std::optional<double> ms;
  std::optional<FStatistic> f;
};

struct AnovaTable {
  std::vector<AnovaRow> rows;

  /// Throws Error("not_found") for an unknown source label.
  const AnovaRow& row(std::string_view source) const;
};

/// Split-plot decomposition with subjects nested in groups. `scores` is
/// subjects x trials; `group_of_subject[i]` is subject i's group index.
/// Throws Error("unbalanced_design") unless every group has the same number
/// of subjects (>= 2), every subject the same number of trials (>= 2), and
/// there are >= 2 groups.
AnovaTable mixed_anova(const std::vector<std::vector<double>>& scores,
                       const std::vector<std::size_t>& group_of_subject);

/// The correctness matrix and engine labels of a replication, as fed to
/// mixed_anova.
AnovaTable replication_anova(const std::vector<SubjectResult>& results);

enum class ReportFormat { kText, kCsv, kJson };
ReportFormat report_format_from_string(std::string_view s);

std::string results_to_csv(const std::vector<SubjectResult>& results);
/// Reads back the CSV columns (mixed-case parameters and satisfaction are
/// not part of the CSV and come back zero/false).
std::vector<SubjectResult> results_from_csv(std::string_view csv);

nlohmann::json results_to_json(const std::vector<SubjectResult>& results);
std::vector<SubjectResult> results_from_json(const nlohmann::json& j);

/// Full report document: metadata (seed, config, version), per-subject
/// results, and the four summary tables.
nlohmann::json report_json(const std::vector<SubjectResult>& results,
                           const ReplicationConfig& config);
std::string report_text(const std::vector<SubjectResult>& results,
                        const ReplicationConfig& config);
std::string render_report(const std::vector<SubjectResult>& results,
                          const ReplicationConfig& config, ReportFormat format);

}  // namespace uisbench
