// Command-line entry point: simulate, tune, replicate, serve, report.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "uisbench/engine_json.hpp"
#include "uisbench/experiment.hpp"
#include "uisbench/http_api.hpp"

using nlohmann::json;
using namespace uisbench;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("io_error", "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json(const std::string& path) {
  json j = json::parse(read_file(path), nullptr, false);
  if (j.is_discarded()) throw Error("bad_json", path + " is not valid JSON");
  return j;
}

void emit(const std::string& text, const std::string& out) {
  if (out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out);
  if (!f) throw Error("io_error", "cannot write " + out);
  f << text;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

struct Common {
  std::uint64_t seed = 1;
  bool seed_set = false;
  std::string config;
  std::string out;
  std::string format = "text";
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--seed", c.seed, "Master seed")->each([&c](const std::string&) { c.seed_set = true; });
  app->add_option("--config", c.config, "JSON config document");
  app->add_option("--out", c.out, "Write output to this file instead of stdout");
  app->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"text", "csv", "json"}));
}

ReplicationConfig load_config(const Common& c) {
  ReplicationConfig config = c.config.empty() ? ReplicationConfig{} : config_from_json(read_json(c.config));
  if (c.seed_set) config.seed = c.seed;
  return config;
}

int run_simulate(const Common& c, std::size_t n) {
  const ReplicationConfig config = load_config(c);
  Rng rng(config.seed);
  std::array<std::size_t, 8> counts{};
  for (std::size_t i = 0; i < n; ++i) ++counts[cell_index(sample_case(config.table, config.readings, rng).cell)];
  Rng oracle_rng(derive_seed(config.seed, 1));
  const double bayes = bayes_optimal_accuracy(config.table, config.readings, n, oracle_rng);

  std::ostringstream out;
  if (c.format == "json") {
    json cells = json::array();
    for (std::size_t i = 0; i < 8; ++i) {
      const CellLabel l = cell_from_index(i);
      cells.push_back({{"cell", std::to_string(l.e1_high) + std::to_string(l.e2_high) +
                                    std::to_string(l.malfunction)},
                       {"expected", config.table.cells()[i]},
                       {"observed", static_cast<double>(counts[i]) / static_cast<double>(n)}});
    }
    out << json{{"seed", config.seed}, {"n", n}, {"cells", cells}, {"bayes_optimal_accuracy", bayes}}.dump(2)
        << '\n';
  } else {
    const char sep = c.format == "csv" ? ',' : '\t';
    out << "cell" << sep << "expected" << sep << "observed\n";
    for (std::size_t i = 0; i < 8; ++i) {
      const CellLabel l = cell_from_index(i);
      out << l.e1_high << l.e2_high << l.malfunction << sep << fixed(config.table.cells()[i], 4) << sep
          << fixed(static_cast<double>(counts[i]) / static_cast<double>(n), 4) << '\n';
    }
    out << "bayes_optimal_accuracy" << sep << sep << fixed(bayes, 4) << '\n';
  }
  emit(out.str(), c.out);
  return 0;
}

int run_tune(const Common& c, const std::string& engine, double sigma, const std::string& mode,
             std::size_t budget, const std::vector<std::string>& vocabulary) {
  const ReplicationConfig config = load_config(c);
  AgentProfile profile;
  profile.engine = engine_kind_from_string(engine);
  profile.noise = {sigma, derive_seed(config.seed, 2)};
  if (!vocabulary.empty()) {
    profile.vocabulary.clear();
    for (const auto& v : vocabulary) profile.vocabulary.push_back(antecedent_from_string(v));
  }
  validate_profile(profile);
  Rng rng(config.seed);
  const TuneResult r = mode == "search"
                           ? tune_search(profile, config.table, config.readings, budget, rng, config.tuning)
                           : tune_iteratively(profile, config.table, config.readings, budget, rng, config.tuning);
  json doc = {{"profile", profile_to_json(profile)},
              {"mode", mode},
              {"trials_used", r.trials_used},
              {"satisfied", r.satisfied},
              {"final_accuracy", r.final_accuracy},
              {"sweep_accuracy", r.sweep_accuracy},
              {"system", system_to_json(r.system)}};
  if (c.format == "json") {
    emit(doc.dump(2) + "\n", c.out);
  } else {
    std::ostringstream out;
    out << "engine " << engine << "  mode " << mode << "  sigma " << fixed(sigma, 3) << '\n'
        << "trials_used " << r.trials_used << "  satisfied " << (r.satisfied ? "yes" : "no")
        << "  final_accuracy " << fixed(r.final_accuracy, 4) << '\n'
        << doc["system"].dump(2) << '\n';
    emit(out.str(), c.out);
  }
  return 0;
}

int run_replicate(const Common& c, std::size_t agents) {
  ReplicationConfig config = load_config(c);
  if (agents > 0) config.agents_per_uis = agents;
  const auto results = run_replication(config);
  emit(render_report(results, config, report_format_from_string(c.format)), c.out);
  return 0;
}

int run_report(const Common& c, const std::string& in) {
  const std::string text = read_file(in);
  ReplicationConfig config = load_config(c);
  std::vector<SubjectResult> results;
  const json doc = json::parse(text, nullptr, false);
  if (!doc.is_discarded()) {
    if (doc.is_object() && doc.contains("results")) {
      results = results_from_json(doc.at("results"));
      if (c.config.empty() && doc.contains("metadata")) {
        config = config_from_json(doc.at("metadata").at("config"));
        if (c.seed_set) config.seed = c.seed;
      }
    } else {
      results = results_from_json(doc);
    }
  } else {
    results = results_from_csv(text);
  }
  emit(render_report(results, config, report_format_from_string(c.format)), c.out);
  return 0;
}

int run_serve(const std::string& bind, int port, const std::string& data_dir) {
  SessionStore store(data_dir);
  httplib::Server server;
  mount_api(server, store);
  std::cerr << "uisbench " << kVersion << " listening on " << bind << ':' << port << " (data " << data_dir
            << ")\n";
  if (!server.listen(bind, port)) {
    std::cerr << "cannot listen on " << bind << ':' << port << '\n';
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Uncertain-inference workbench"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  Common sim_opts, tune_opts, rep_opts, report_opts;

  auto* simulate = app.add_subcommand("simulate", "Sample cases and report cell frequencies and the oracle accuracy");
  add_common(simulate, sim_opts);
  std::size_t sim_n = 100000;
  simulate->add_option("-n,--samples", sim_n, "Number of cases")->check(CLI::PositiveNumber);

  auto* tune = app.add_subcommand("tune", "Build and tune one agent's system");
  add_common(tune, tune_opts);
  std::string engine = "independence";
  std::string mode = "iterative";
  double sigma = 0.0;
  std::size_t budget = 500;
  std::vector<std::string> vocabulary;
  tune->add_option("--engine", engine, "Engine tag")->required();
  tune->add_option("--mode", mode, "search (grid coordinate descent) or iterative (probe loop)")
      ->check(CLI::IsMember({"search", "iterative"}));
  tune->add_option("--sigma", sigma, "Estimation noise sd")->check(CLI::NonNegativeNumber);
  tune->add_option("--budget", budget, "Validation cases (search) or trial cap (iterative)")
      ->check(CLI::PositiveNumber);
  tune->add_option("--vocabulary", vocabulary, "Rule forms: E1 E2 E1_AND_E2 E1_OR_E2");

  auto* replicate = app.add_subcommand("replicate", "Run the agents x engines replication");
  add_common(replicate, rep_opts);
  std::size_t agents = 0;
  replicate->add_option("--agents", agents, "Agents per engine (overrides config)");

  auto* report = app.add_subcommand("report", "Re-render saved results (JSON report or CSV)");
  add_common(report, report_opts);
  std::string report_in;
  report->add_option("--in", report_in, "Saved results file")->required()->check(CLI::ExistingFile);

  auto* serve = app.add_subcommand("serve", "Run the participant HTTP API");
  std::string bind = "127.0.0.1";
  int port = 8080;
  std::string data_dir = "sessions";
  serve->add_option("--bind", bind, "Bind address")->envname("UISB_BIND");
  serve->add_option("--port", port, "Port")->envname("UISB_PORT")->check(CLI::Range(0, 65535));
  serve->add_option("--data-dir", data_dir, "Event log and snapshot directory")->envname("UISB_DATA_DIR");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*simulate) return run_simulate(sim_opts, sim_n);
    if (*tune) return run_tune(tune_opts, engine, sigma, mode, budget, vocabulary);
    if (*replicate) return run_replicate(rep_opts, agents);
    if (*report) return run_report(report_opts, report_in);
    if (*serve) return run_serve(bind, port, data_dir);
  } catch (const Error& e) {
    std::cerr << "error [" << e.code() << "]" << (e.field().empty() ? "" : " " + e.field()) << ": "
              << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
