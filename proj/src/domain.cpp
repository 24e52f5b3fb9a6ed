#include "uisbench/domain.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace uisbench {

ContingencyTable::ContingencyTable(const std::array<double, 8>& joint) : joint_(joint) {
  double sum = 0.0;
  for (std::size_t i = 0; i < joint_.size(); ++i) {
    if (!std::isfinite(joint_[i]) || joint_[i] < 0.0) {
      throw Error("validation_error", "joint probabilities must be finite and non-negative",
                  "joint." + std::to_string(i >> 2) + std::to_string((i >> 1) & 1) +
                      std::to_string(i & 1));
    }
    sum += joint_[i];
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw Error("validation_error", "joint probabilities must sum to 1 (got " +
                                        std::to_string(sum) + ")",
                "joint");
  }
}

double ContingencyTable::evidence_probability(bool e1_high, bool e2_high) const {
  return joint({e1_high, e2_high, true}) + joint({e1_high, e2_high, false});
}

double ContingencyTable::p_malfunction_given(bool e1_high, bool e2_high) const {
  const double denom = evidence_probability(e1_high, e2_high);
  if (denom <= 0.0) {
    throw Error("degenerate_table", "conditioning evidence configuration has zero probability");
  }
  return joint({e1_high, e2_high, true}) / denom;
}

double ContingencyTable::p_malfunction() const {
  double p = 0.0;
  for (std::size_t i = 1; i < 8; i += 2) p += joint_[i];
  return p;
}

double ContingencyTable::p_e1() const {
  return joint_[4] + joint_[5] + joint_[6] + joint_[7];
}

double ContingencyTable::p_e2() const {
  return joint_[2] + joint_[3] + joint_[6] + joint_[7];
}

double Gaussian::density(double x) const {
  const double z = (x - mean) / sd;
  return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
}

void ReadingModel::validate() const {
  const std::pair<const char*, const Gaussian*> all[] = {{"readings.normal_temp.sd", &normal_temp},
                                                         {"readings.high_temp.sd", &high_temp},
                                                         {"readings.normal_pressure.sd", &normal_pressure},
                                                         {"readings.high_pressure.sd", &high_pressure}};
  for (const auto& [name, g] : all) {
    if (!std::isfinite(g->sd) || g->sd <= 0.0 || !std::isfinite(g->mean)) {
      throw Error("validation_error", "reading model needs finite mean and sd > 0", name);
    }
  }
}

TrialRecord make_record(const Case& c, Verdict answer, std::size_t trial_index) {
  return TrialRecord{c, answer, answer == truth_of(c), trial_index};
}

ContingencyTable default_table() {
  // cell order: (e1, e2, c) = 000, 001, 010, 011, 100, 101, 110, 111
  return ContingencyTable({0.315, 0.035, 0.120, 0.030, 0.120, 0.030, 0.035, 0.315});
}

ReadingModel default_readings() {
  return ReadingModel{{180.0, 5.0}, {200.0, 5.0}, {70.0, 3.0}, {82.0, 3.0}};
}

Case sample_case(const ContingencyTable& table, const ReadingModel& readings, Rng& rng) {
  const auto& w = table.cells();
  std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
  const CellLabel cell = cell_from_index(pick(rng));
  const Gaussian& gt = readings.temperature(cell.e1_high);
  const Gaussian& gp = readings.pressure(cell.e2_high);
  std::normal_distribution<double> t(gt.mean, gt.sd);
  std::normal_distribution<double> p(gp.mean, gp.sd);
  Case c;
  c.cell = cell;
  c.temperature = t(rng);
  c.pressure = p(rng);
  return c;
}

double exact_posterior(const ContingencyTable& table, const ReadingModel& readings,
                       double temperature, double pressure) {
  double numer = 0.0;
  double denom = 0.0;
  for (std::size_t i = 0; i < 8; ++i) {
    const CellLabel cell = cell_from_index(i);
    const double w = table.cells()[i] * readings.temperature(cell.e1_high).density(temperature) *
                     readings.pressure(cell.e2_high).density(pressure);
    denom += w;
    if (cell.malfunction) numer += w;
  }
  if (!(denom > 0.0) || !std::isfinite(denom)) {
    throw Error("unrepresentable_reading",
                "reading likelihood underflows; posterior is not representable");
  }
  return numer / denom;
}

double bayes_optimal_accuracy(const ContingencyTable& table, const ReadingModel& readings,
                              std::size_t n, Rng& rng) {
  if (n == 0) throw Error("invalid_argument", "n must be >= 1", "n");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const Case c = sample_case(table, readings, rng);
    if (oracle_verdict(table, readings, c.temperature, c.pressure) == truth_of(c)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(n);
}

bool criterion_met(std::span<const TrialRecord> history) {
  if (history.size() < kCriterionWindow) return false;
  std::size_t correct = 0;
  for (const auto& r : history.last(kCriterionWindow)) correct += r.correct ? 1 : 0;
  return correct >= kCriterionCorrect;
}

double display_reading(double value) { return std::round(value * 10.0) / 10.0; }

namespace {

const char* const kReadingKeys[] = {"normal_temp", "high_temp", "normal_pressure",
                                    "high_pressure"};

std::string joint_key(std::size_t i) {
  return std::to_string(i >> 2) + std::to_string((i >> 1) & 1) + std::to_string(i & 1);
}

Gaussian& reading_slot(ReadingModel& m, std::size_t i) {
  Gaussian* slots[] = {&m.normal_temp, &m.high_temp, &m.normal_pressure, &m.high_pressure};
  return *slots[i];
}

double number_at(const nlohmann::json& j, const std::string& key, const std::string& path) {
  if (!j.contains(key)) throw Error("validation_error", "missing key", path);
  if (!j.at(key).is_number()) throw Error("validation_error", "expected a number", path);
  return j.at(key).get<double>();
}

}  // namespace

nlohmann::json domain_to_json(const ContingencyTable& table, const ReadingModel& readings) {
  nlohmann::json j;
  for (std::size_t i = 0; i < 8; ++i) j["joint"][joint_key(i)] = table.cells()[i];
  ReadingModel r = readings;
  for (std::size_t i = 0; i < 4; ++i) {
    j["readings"][kReadingKeys[i]] = {{"mean", reading_slot(r, i).mean},
                                      {"sd", reading_slot(r, i).sd}};
  }
  return j;
}

ContingencyTable table_from_json(const nlohmann::json& j) {
  if (!j.contains("joint")) return default_table();
  const auto& joint = j.at("joint");
  std::array<double, 8> cells{};
  for (std::size_t i = 0; i < 8; ++i) {
    cells[i] = number_at(joint, joint_key(i), "joint." + joint_key(i));
  }
  return ContingencyTable(cells);
}

ReadingModel readings_from_json(const nlohmann::json& j) {
  ReadingModel m = default_readings();
  if (!j.contains("readings")) return m;
  const auto& r = j.at("readings");
  for (std::size_t i = 0; i < 4; ++i) {
    if (!r.contains(kReadingKeys[i])) continue;
    const std::string base = std::string("readings.") + kReadingKeys[i];
    const auto& g = r.at(kReadingKeys[i]);
    if (g.contains("mean")) reading_slot(m, i).mean = number_at(g, "mean", base + ".mean");
    if (g.contains("sd")) reading_slot(m, i).sd = number_at(g, "sd", base + ".sd");
  }
  m.validate();
  return m;
}

}  // namespace uisbench
