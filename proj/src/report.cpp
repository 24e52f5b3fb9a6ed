#include <algorithm>
#include <array>
#include <cstdio>
#include <sstream>

#include "uisbench/experiment.hpp"

namespace uisbench {

using nlohmann::json;

namespace {

// Reference values from the original participant study, in kAllEngines order.
constexpr std::array<double, 6> kHumanTrialsToTune = {9.5, 19.3, 11.3, 8.1, 18.5, 10.0};
constexpr std::array<double, 6> kHumanConsistent = {0.90, 0.85, 0.87, 0.85, 0.84, 0.93};
constexpr std::array<double, 6> kHumanMixed = {0.31, 0.26, 0.74, 0.53, 0.57, 0.60};
constexpr std::array<double, 6> kHumanNormalTempHighPressure = {0.81, 0.80, 0.43, 0.33, 0.49, 0.50};
constexpr std::array<double, 6> kHumanHighTempNormalPressure = {0.59, 0.71, 0.40, 0.37, 0.35, 0.50};

constexpr const char* kCsvHeader = "engine,subject,trial,evidence_type,correct,trials_to_tune";

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

struct EngineSummary {
  EngineKind engine = EngineKind::kIndependence;
  std::size_t subjects = 0;
  double mean_trials = 0.0;
  double mean_nh = 0.0;
  double mean_hn = 0.0;
  std::vector<double> nh;
  std::vector<double> hn;
};

std::vector<EngineSummary> summarise(const std::vector<SubjectResult>& results) {
  std::vector<EngineSummary> out;
  for (const auto& r : results) {
    auto it = std::find_if(out.begin(), out.end(),
                           [&](const EngineSummary& s) { return s.engine == r.engine; });
    if (it == out.end()) {
      EngineSummary fresh;
      fresh.engine = r.engine;
      out.push_back(fresh);
      it = out.end() - 1;
    }
    ++it->subjects;
    it->mean_trials += static_cast<double>(r.trials_to_tune);
    it->nh.push_back(r.mixed_params.normal_temp_high_pressure);
    it->hn.push_back(r.mixed_params.high_temp_normal_pressure);
  }
  for (auto& s : out) {
    const auto n = static_cast<double>(s.subjects);
    s.mean_trials /= n;
    for (double v : s.nh) s.mean_nh += v;
    for (double v : s.hn) s.mean_hn += v;
    s.mean_nh /= n;
    s.mean_hn /= n;
  }
  return out;
}

std::size_t engine_ordinal(EngineKind k) { return static_cast<std::size_t>(k); }

std::optional<OneWayAnova> try_one_way(const std::vector<EngineSummary>& s, bool nh) {
  std::vector<std::vector<double>> groups;
  for (const auto& e : s) groups.push_back(nh ? e.nh : e.hn);
  try {
    return one_way_anova(groups);
  } catch (const Error&) {
    return std::nullopt;
  }
}

json f_to_json(const FStatistic& f) {
  return {{"value", f.infinite ? json(nullptr) : json(f.value)}, {"infinite", f.infinite}};
}

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string f_text(const FStatistic& f) { return f.infinite ? "inf" : fmt("%.2f", f.value); }

std::string opt_text(const std::optional<double>& v) { return v ? fmt("%.2f", *v) : "n/a"; }

std::size_t to_size(const std::string& s, const char* field) {
  try {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw Error("parse_error", "expected a non-negative integer, got \"" + s + "\"", field);
  }
}

}  // namespace

ReportFormat report_format_from_string(std::string_view s) {
  if (s == "text") return ReportFormat::kText;
  if (s == "csv") return ReportFormat::kCsv;
  if (s == "json") return ReportFormat::kJson;
  throw Error("validation_error", "format must be text, csv or json", "format");
}

std::string results_to_csv(const std::vector<SubjectResult>& results) {
  std::ostringstream out;
  out << kCsvHeader << '\n';
  for (const auto& r : results) {
    for (std::size_t t = 0; t < r.correct.size(); ++t) {
      out << to_string(r.engine) << ',' << r.subject << ',' << t << ','
          << to_string(r.evidence[t]) << ',' << (r.correct[t] ? 1 : 0) << ',' << r.trials_to_tune
          << '\n';
    }
  }
  return out.str();
}

std::vector<SubjectResult> results_from_csv(std::string_view csv) {
  std::istringstream in{std::string(csv)};
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw Error("parse_error", std::string("first line must be the header ") + kCsvHeader);
  }
  std::vector<SubjectResult> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::istringstream fields(line);
    std::string col;
    while (std::getline(fields, col, ',')) cols.push_back(col);
    if (cols.size() != 6) {
      throw Error("parse_error", "line " + std::to_string(line_no) + ": expected 6 columns");
    }
    const EngineKind engine = engine_kind_from_string(cols[0]);
    const std::size_t subject = to_size(cols[1], "subject");
    const std::size_t trial = to_size(cols[2], "trial");
    const EvidenceType evidence = evidence_type_from_string(cols[3]);
    if (cols[4] != "0" && cols[4] != "1") throw Error("parse_error", "correct must be 0 or 1", "correct");
    const std::size_t tune = to_size(cols[5], "trials_to_tune");

    if (out.empty() || out.back().engine != engine || out.back().subject != subject) {
      SubjectResult r;
      r.engine = engine;
      r.subject = subject;
      r.trials_to_tune = tune;
      out.push_back(std::move(r));
    }
    SubjectResult& r = out.back();
    if (trial != r.correct.size()) {
      throw Error("parse_error", "line " + std::to_string(line_no) + ": trials out of order", "trial");
    }
    r.correct.push_back(cols[4] == "1");
    r.evidence.push_back(evidence);
  }
  return out;
}

json results_to_json(const std::vector<SubjectResult>& results) {
  json out = json::array();
  for (const auto& r : results) {
    json trials = json::array();
    for (std::size_t t = 0; t < r.correct.size(); ++t) {
      trials.push_back(
          {{"trial", t}, {"evidence_type", to_string(r.evidence[t])}, {"correct", r.correct[t]}});
    }
    out.push_back({{"engine", to_string(r.engine)},
                   {"subject", r.subject},
                   {"trials_to_tune", r.trials_to_tune},
                   {"satisfied", r.satisfied},
                   {"mixed_params",
                    {{"normal_temp_high_pressure", r.mixed_params.normal_temp_high_pressure},
                     {"high_temp_normal_pressure", r.mixed_params.high_temp_normal_pressure}}},
                   {"trials", trials}});
  }
  return out;
}

std::vector<SubjectResult> results_from_json(const json& j) {
  if (!j.is_array()) throw Error("parse_error", "results must be an array");
  std::vector<SubjectResult> out;
  try {
    for (const auto& s : j) {
      SubjectResult r;
      r.engine = engine_kind_from_string(s.at("engine").get<std::string>());
      r.subject = s.at("subject").get<std::size_t>();
      r.trials_to_tune = s.at("trials_to_tune").get<std::size_t>();
      r.satisfied = s.value("satisfied", false);
      if (s.contains("mixed_params")) {
        const auto& m = s.at("mixed_params");
        r.mixed_params.normal_temp_high_pressure = m.at("normal_temp_high_pressure").get<double>();
        r.mixed_params.high_temp_normal_pressure = m.at("high_temp_normal_pressure").get<double>();
      }
      for (const auto& t : s.at("trials")) {
        r.evidence.push_back(evidence_type_from_string(t.at("evidence_type").get<std::string>()));
        r.correct.push_back(t.at("correct").get<bool>());
      }
      out.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw Error("parse_error", e.what());
  }
  return out;
}

json report_json(const std::vector<SubjectResult>& results, const ReplicationConfig& config) {
  if (results.empty()) throw Error("invalid_argument", "no results to report");
  const auto summary = summarise(results);
  const auto accuracy = accuracy_breakdown(results);

  json tune = json::array();
  json acc = json::array();
  json params = json::array();
  for (const auto& s : summary) {
    const std::size_t k = engine_ordinal(s.engine);
    tune.push_back({{"engine", to_string(s.engine)},
                    {"subjects", s.subjects},
                    {"mean_trials_to_tune", s.mean_trials},
                    {"human_reference", kHumanTrialsToTune[k]}});
    params.push_back({{"engine", to_string(s.engine)},
                      {"normal_temp_high_pressure", s.mean_nh},
                      {"high_temp_normal_pressure", s.mean_hn},
                      {"human_reference",
                       {{"normal_temp_high_pressure", kHumanNormalTempHighPressure[k]},
                        {"high_temp_normal_pressure", kHumanHighTempNormalPressure[k]}}}});
  }
  for (const auto& a : accuracy) {
    const std::size_t k = engine_ordinal(a.engine);
    acc.push_back({{"engine", to_string(a.engine)},
                   {"consistent", opt(a.consistent)},
                   {"mixed", opt(a.mixed)},
                   {"overall", a.overall},
                   {"consistent_n", a.consistent_n},
                   {"mixed_n", a.mixed_n},
                   {"human_reference",
                    {{"consistent", kHumanConsistent[k]}, {"mixed", kHumanMixed[k]}}}});
  }

  json param_anova = json::object();
  for (const bool nh : {true, false}) {
    const auto a = try_one_way(summary, nh);
    param_anova[nh ? "normal_temp_high_pressure" : "high_temp_normal_pressure"] =
        a ? json{{"f", f_to_json(a->f)}, {"df_between", a->df_between}, {"df_within", a->df_within}}
          : json(nullptr);
  }

  json anova = nullptr;
  std::string anova_note;
  try {
    const AnovaTable table = replication_anova(results);
    anova = json::array();
    for (const auto& r : table.rows) {
      anova.push_back({{"source", r.source},
                       {"df", r.df},
                       {"ss", r.ss},
                       {"ms", opt(r.ms)},
                       {"f", r.f ? f_to_json(*r.f) : json(nullptr)}});
    }
  } catch (const Error& e) {
    anova_note = e.what();
  }

  json doc = {{"metadata",
               {{"seed", config.seed}, {"version", std::string(kVersion)}, {"config", config_to_json(config)}}},
              {"results", results_to_json(results)},
              {"tables",
               {{"trials_to_tune", tune},
                {"accuracy_by_evidence", acc},
                {"mixed_case_parameters", {{"rows", params}, {"anova", param_anova}}},
                {"anova", anova}}},
              {"human_reference_note", "human reference (original participant study)"}};
  if (!anova_note.empty()) doc["tables"]["anova_note"] = anova_note;
  return doc;
}

std::string report_text(const std::vector<SubjectResult>& results, const ReplicationConfig& config) {
  if (results.empty()) throw Error("invalid_argument", "no results to report");
  const auto summary = summarise(results);
  const auto accuracy = accuracy_breakdown(results);
  std::ostringstream out;

  out << "uisbench " << kVersion << "  seed " << config.seed << "  engines " << summary.size()
      << "  subjects " << results.size() << " (" << summary.front().subjects << " per engine)  noise sigma " << fmt("%.3f", config.noise_sigma)
      << "\n\n";

  out << "Trials to tune (mean per engine)\n";
  out << pad("engine", 18) << pad("subjects", 10) << pad("mean", 10) << "human\n";
  for (const auto& s : summary) {
    out << pad(std::string(to_string(s.engine)), 18) << pad(std::to_string(s.subjects), 10)
        << pad(fmt("%.1f", s.mean_trials), 10) << fmt("%.1f", kHumanTrialsToTune[engine_ordinal(s.engine)])
        << '\n';
  }

  out << "\nAccuracy by evidence type\n";
  out << pad("engine", 18) << pad("consistent", 12) << pad("mixed", 10) << pad("overall", 10)
      << "human (cons/mixed)\n";
  for (const auto& a : accuracy) {
    const std::size_t k = engine_ordinal(a.engine);
    out << pad(std::string(to_string(a.engine)), 18) << pad(opt_text(a.consistent), 12)
        << pad(opt_text(a.mixed), 10) << pad(fmt("%.2f", a.overall), 10)
        << fmt("%.2f", kHumanConsistent[k]) << " / " << fmt("%.2f", kHumanMixed[k]) << '\n';
  }

  out << "\nMixed-case parameters, rescaled to [0,1]\n";
  out << pad("engine", 18) << pad("NT/HP", 10) << pad("HT/NP", 10) << "human (NT/HP, HT/NP)\n";
  for (const auto& s : summary) {
    const std::size_t k = engine_ordinal(s.engine);
    out << pad(std::string(to_string(s.engine)), 18) << pad(fmt("%.2f", s.mean_nh), 10)
        << pad(fmt("%.2f", s.mean_hn), 10) << fmt("%.2f", kHumanNormalTempHighPressure[k]) << " / "
        << fmt("%.2f", kHumanHighTempNormalPressure[k]) << '\n';
  }
  for (const bool nh : {true, false}) {
    const auto a = try_one_way(summary, nh);
    out << (nh ? "  NT/HP across engines: " : "  HT/NP across engines: ");
    if (a) {
      out << "F(" << a->df_between << "," << a->df_within << ") = " << f_text(a->f) << '\n';
    } else {
      out << "not computable (needs >= 2 engines with >= 2 subjects)\n";
    }
  }

  out << "\nMixed-design ANOVA on trial correctness\n";
  try {
    const AnovaTable table = replication_anova(results);
    out << pad("source", 20) << pad("df", 8) << pad("SS", 12) << pad("MS", 10) << "F\n";
    for (const auto& r : table.rows) {
      out << pad(r.source, 20) << pad(std::to_string(r.df), 8) << pad(fmt("%.2f", r.ss), 12)
          << pad(r.ms ? fmt("%.3f", *r.ms) : "", 10) << (r.f ? f_text(*r.f) : "") << '\n';
    }
  } catch (const Error& e) {
    out << "  not computable: " << e.what() << '\n';
  }

  out << "\nhuman columns: human reference (original participant study)\n";
  return out.str();
}

std::string render_report(const std::vector<SubjectResult>& results,
                          const ReplicationConfig& config, ReportFormat format) {
  switch (format) {
    case ReportFormat::kCsv:
      return results_to_csv(results);
    case ReportFormat::kJson:
      return report_json(results, config).dump(2) + "\n";
    case ReportFormat::kText:
      break;
  }
  return report_text(results, config);
}

}  // namespace uisbench
