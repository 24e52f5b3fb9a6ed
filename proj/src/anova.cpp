#include <algorithm>
#include <cmath>
#include <limits>

#include "uisbench/experiment.hpp"

namespace uisbench {

namespace {

FStatistic ratio(double ms_effect, double ms_error) {
  if (ms_error == 0.0) return {std::numeric_limits<double>::infinity(), true};
  return {ms_effect / ms_error, false};
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

OneWayAnova one_way_anova(const std::vector<std::vector<double>>& groups) {
  if (groups.size() < 2) throw Error("invalid_argument", "need at least two groups", "groups");
  double grand = 0.0;
  std::size_t n = 0;
  for (const auto& g : groups) {
    if (g.size() < 2) {
      throw Error("invalid_argument", "every group needs at least two observations", "groups");
    }
    for (double x : g) {
      if (!std::isfinite(x)) throw Error("invalid_argument", "observations must be finite", "groups");
      grand += x;
    }
    n += g.size();
  }
  grand /= static_cast<double>(n);

  OneWayAnova out;
  for (const auto& g : groups) {
    const double m = mean_of(g);
    out.ss_between += static_cast<double>(g.size()) * (m - grand) * (m - grand);
    for (double x : g) out.ss_within += (x - m) * (x - m);
  }
  out.df_between = static_cast<long>(groups.size()) - 1;
  out.df_within = static_cast<long>(n - groups.size());
  out.f = ratio(out.ss_between / static_cast<double>(out.df_between),
                out.ss_within / static_cast<double>(out.df_within));
  return out;
}

const AnovaRow& AnovaTable::row(std::string_view source) const {
  for (const auto& r : rows) {
    if (r.source == source) return r;
  }
  throw Error("not_found", "no ANOVA row named " + std::string(source));
}

AnovaTable mixed_anova(const std::vector<std::vector<double>>& scores,
                       const std::vector<std::size_t>& group_of_subject) {
  if (scores.size() != group_of_subject.size()) {
    throw Error("unbalanced_design", "one group label per subject required");
  }
  // Subjects of each group, groups in order of first appearance.
  std::vector<std::size_t> labels;
  std::vector<std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < group_of_subject.size(); ++i) {
    const auto it = std::find(labels.begin(), labels.end(), group_of_subject[i]);
    if (it == labels.end()) {
      labels.push_back(group_of_subject[i]);
      members.push_back({i});
    } else {
      members[static_cast<std::size_t>(it - labels.begin())].push_back(i);
    }
  }
  const std::size_t G = members.size();
  if (G < 2) throw Error("unbalanced_design", "need at least two groups");
  const std::size_t S = members.front().size();
  if (S < 2) throw Error("unbalanced_design", "need at least two subjects per group");
  for (const auto& m : members) {
    if (m.size() != S) throw Error("unbalanced_design", "groups differ in size");
  }
  const std::size_t T = scores.front().size();
  if (T < 2) throw Error("unbalanced_design", "need at least two trials per subject");
  for (const auto& row : scores) {
    if (row.size() != T) throw Error("unbalanced_design", "subjects differ in trial count");
    for (double x : row) {
      if (!std::isfinite(x)) throw Error("invalid_argument", "scores must be finite");
    }
  }

  const auto Gd = static_cast<double>(G);
  const auto Sd = static_cast<double>(S);
  const auto Td = static_cast<double>(T);

  double grand = 0.0;
  std::vector<double> subj_mean(scores.size(), 0.0);
  std::vector<double> group_mean(G, 0.0);
  std::vector<double> trial_mean(T, 0.0);
  std::vector<std::vector<double>> cell_mean(G, std::vector<double>(T, 0.0));
  for (std::size_t g = 0; g < G; ++g) {
    for (std::size_t i : members[g]) {
      for (std::size_t t = 0; t < T; ++t) {
        const double y = scores[i][t];
        grand += y;
        subj_mean[i] += y;
        group_mean[g] += y;
        trial_mean[t] += y;
        cell_mean[g][t] += y;
      }
    }
  }
  grand /= Gd * Sd * Td;
  for (double& m : subj_mean) m /= Td;
  for (double& m : group_mean) m /= Sd * Td;
  for (double& m : trial_mean) m /= Gd * Sd;
  for (auto& row : cell_mean) {
    for (double& m : row) m /= Sd;
  }

  double ss_total = 0.0, ss_between = 0.0, ss_uis = 0.0, ss_within = 0.0;
  double ss_subj = 0.0, ss_trials = 0.0, ss_inter = 0.0, ss_error = 0.0;
  for (std::size_t g = 0; g < G; ++g) {
    ss_uis += Sd * Td * (group_mean[g] - grand) * (group_mean[g] - grand);
    for (std::size_t t = 0; t < T; ++t) {
      const double d = cell_mean[g][t] - group_mean[g] - trial_mean[t] + grand;
      ss_inter += Sd * d * d;
    }
    for (std::size_t i : members[g]) {
      ss_between += Td * (subj_mean[i] - grand) * (subj_mean[i] - grand);
      ss_subj += Td * (subj_mean[i] - group_mean[g]) * (subj_mean[i] - group_mean[g]);
      for (std::size_t t = 0; t < T; ++t) {
        const double y = scores[i][t];
        ss_total += (y - grand) * (y - grand);
        ss_within += (y - subj_mean[i]) * (y - subj_mean[i]);
        const double e = y - subj_mean[i] - cell_mean[g][t] + group_mean[g];
        ss_error += e * e;
      }
    }
  }
  for (std::size_t t = 0; t < T; ++t) {
    ss_trials += Gd * Sd * (trial_mean[t] - grand) * (trial_mean[t] - grand);
  }
  const long df_uis = static_cast<long>(G) - 1;
  const long df_subj = static_cast<long>(G * (S - 1));
  const long df_trials = static_cast<long>(T) - 1;
  const long df_inter = df_uis * df_trials;
  const long df_error = df_subj * df_trials;

  const double ms_uis = ss_uis / static_cast<double>(df_uis);
  const double ms_subj = ss_subj / static_cast<double>(df_subj);
  const double ms_trials = ss_trials / static_cast<double>(df_trials);
  const double ms_inter = ss_inter / static_cast<double>(df_inter);
  const double ms_error = ss_error / static_cast<double>(df_error);

  AnovaTable out;
  out.rows = {
      {"BETWEEN", df_uis + df_subj, ss_between, std::nullopt, std::nullopt},
      {"UIS", df_uis, ss_uis, ms_uis, ratio(ms_uis, ms_subj)},
      {"SUBJ(UIS)", df_subj, ss_subj, ms_subj, std::nullopt},
      {"WITHIN", static_cast<long>(G * S * (T - 1)), ss_within, std::nullopt, std::nullopt},
      {"TRIALS", df_trials, ss_trials, ms_trials, ratio(ms_trials, ms_error)},
      {"UIS*TRIALS", df_inter, ss_inter, ms_inter, ratio(ms_inter, ms_error)},
      {"TRIALS*SUBJ(UIS)", df_error, ss_error, ms_error, std::nullopt},
      {"TOTAL", static_cast<long>(G * S * T) - 1, ss_total, std::nullopt, std::nullopt},
  };
  return out;
}

AnovaTable replication_anova(const std::vector<SubjectResult>& results) {
  std::vector<std::vector<double>> scores;
  std::vector<std::size_t> groups;
  for (const auto& r : results) {
    std::vector<double> row;
    row.reserve(r.correct.size());
    for (bool c : r.correct) row.push_back(c ? 1.0 : 0.0);
    scores.push_back(std::move(row));
    groups.push_back(static_cast<std::size_t>(r.engine));
  }
  return mixed_anova(scores, groups);
}

}  // namespace uisbench
