#include "uisbench/session.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "uisbench/engine_json.hpp"
#include "uisbench/experiment.hpp"

namespace uisbench {

using nlohmann::json;

namespace {

constexpr std::uint64_t kLearningStream = 0x5e55101;
constexpr std::uint64_t kSessionTestStream = 0x5e55102;
constexpr std::uint64_t kIdStream = 0x5e55103;

Error wrong_phase(Phase have, const char* need) {
  return Error("wrong_phase",
               "session is in phase " + std::string(to_string(have)) + "; this call needs " + need);
}

json cell_to_json(const CellLabel& c) {
  return {{"e1_high", c.e1_high}, {"e2_high", c.e2_high}, {"malfunction", c.malfunction}};
}

json case_to_json(const Case& c) {
  return {{"temperature", c.temperature}, {"pressure", c.pressure}, {"cell", cell_to_json(c.cell)}};
}

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string verdict_string(Verdict v) { return std::string(1, to_char(v)); }

bool valid_id(const std::string& id) {
  if (id.size() != 16) return false;
  for (char ch : id) {
    if (!((ch >= '0' && ch <= '9') || (ch >= 'a' && ch <= 'f'))) return false;
  }
  return true;
}

std::string hex16(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

TestSummary run_test(const SessionState& s) {
  TestSummary t;
  std::size_t right = 0, cons = 0, cons_right = 0, mixed = 0, mixed_right = 0;
  for (std::size_t i = 0; i < kSessionTestTrials; ++i) {
    TestTrial trial;
    trial.c = session_test_case(s.seed, i);
    try {
      trial.verdict = infer(*s.system, {trial.c.temperature, trial.c.pressure}).verdict;
    } catch (const Error&) {
      trial.verdict.reset();
    }
    trial.correct = trial.verdict && *trial.verdict == truth_of(trial.c);
    right += trial.correct ? 1 : 0;
    if (classify_trial(trial.c) == EvidenceType::kMixed) {
      ++mixed;
      mixed_right += trial.correct ? 1 : 0;
    } else {
      ++cons;
      cons_right += trial.correct ? 1 : 0;
    }
    t.trials.push_back(trial);
  }
  t.accuracy = static_cast<double>(right) / static_cast<double>(kSessionTestTrials);
  if (cons > 0) t.consistent_accuracy = static_cast<double>(cons_right) / static_cast<double>(cons);
  if (mixed > 0) t.mixed_accuracy = static_cast<double>(mixed_right) / static_cast<double>(mixed);
  t.trials_to_tune = s.probes.size();
  return t;
}

template <class T>
T field(const json& event, const char* key) {
  try {
    return event.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error("invalid_event", std::string("event is missing a valid \"") + key + "\"", key);
  }
}

}  // namespace

std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::kLearning: return "Learning";
    case Phase::kBuilding: return "Building";
    case Phase::kTuning: return "Tuning";
    case Phase::kTesting: return "Testing";
    case Phase::kDone: return "Done";
  }
  return "Learning";
}

Phase phase_from_string(std::string_view s) {
  for (Phase p : {Phase::kLearning, Phase::kBuilding, Phase::kTuning, Phase::kTesting, Phase::kDone}) {
    if (to_string(p) == s) return p;
  }
  throw Error("validation_error", "unknown phase \"" + std::string(s) + "\"", "phase");
}

Case learning_case(std::uint64_t seed, std::size_t index) {
  Rng rng(derive_seed(seed, kLearningStream, index));
  return sample_case(default_table(), default_readings(), rng);
}

Case session_test_case(std::uint64_t seed, std::size_t index) {
  Rng rng(derive_seed(seed, kSessionTestStream, index));
  return sample_case(default_table(), default_readings(), rng);
}

json created_event(const std::string& id, EngineKind engine, std::uint64_t seed) {
  return {{"type", "created"}, {"id", id}, {"engine", to_string(engine)}, {"seed", seed}};
}
json trial_staged_event(std::size_t index) { return {{"type", "trial_staged"}, {"index", index}}; }
json answer_event(Verdict v) { return {{"type", "answer"}, {"verdict", verdict_string(v)}}; }
json system_put_event(const UisSystem& sys) {
  return {{"type", "system_put"}, {"system", system_to_json(sys)}};
}
json probe_event(double temperature, double pressure) {
  return {{"type", "probe"}, {"temperature", temperature}, {"pressure", pressure}};
}
json finalized_event() { return {{"type", "finalized"}}; }

ValidationFailure::ValidationFailure(std::vector<FieldError> errors)
    : Error("validation_error", errors.empty() ? "invalid system" : errors.front().message,
            errors.empty() ? std::string() : errors.front().field),
      errors_(std::move(errors)) {}

SessionState apply(SessionState s, const json& event) {
  if (!event.is_object()) throw Error("invalid_event", "event must be an object");
  const std::string type = field<std::string>(event, "type");

  if (type == "created") {
    if (!s.id.empty()) throw Error("invalid_event", "session already created");
    s.id = field<std::string>(event, "id");
    s.engine = engine_kind_from_string(field<std::string>(event, "engine"));
    s.seed = field<std::uint64_t>(event, "seed");
    s.phase = Phase::kLearning;
    return s;
  }
  if (s.id.empty()) throw Error("invalid_event", "first event must be \"created\"");

  if (type == "trial_staged") {
    if (s.phase != Phase::kLearning) throw wrong_phase(s.phase, "Learning");
    const auto index = field<std::size_t>(event, "index");
    if (s.staged || index != s.learning.size()) {
      throw Error("invalid_event", "trial index out of sequence", "index");
    }
    s.staged = learning_case(s.seed, index);
  } else if (type == "answer") {
    if (s.phase != Phase::kLearning) throw wrong_phase(s.phase, "Learning");
    if (!s.staged) throw Error("no_staged_trial", "no learning trial is waiting for an answer");
    const Verdict v = verdict_from_string(field<std::string>(event, "verdict"));
    s.learning.push_back(make_record(*s.staged, v, s.learning.size()));
    s.staged.reset();
    if (criterion_met(s.learning)) {
      s.phase = Phase::kBuilding;
    } else if (s.learning.size() >= kLearningTrialCap) {
      s.learning_cap_reached = true;
      s.phase = Phase::kDone;
    }
  } else if (type == "system_put") {
    if (s.phase != Phase::kBuilding && s.phase != Phase::kTuning) {
      throw wrong_phase(s.phase, "Building or Tuning");
    }
    if (!event.contains("system")) throw Error("invalid_event", "missing system", "system");
    UisSystem sys = system_from_json(event.at("system"));
    if (kind_of(sys) != s.engine) {
      throw Error("kind_mismatch",
                  "session engine is " + std::string(to_string(s.engine)) + ", got " +
                      std::string(to_string(kind_of(sys))),
                  "kind");
    }
    auto errors = validate(sys);
    if (!errors.empty()) throw ValidationFailure(std::move(errors));
    s.system = std::move(sys);
    s.phase = Phase::kTuning;
  } else if (type == "probe") {
    if (s.phase != Phase::kTuning) throw wrong_phase(s.phase, "Tuning");
    const auto t = field<double>(event, "temperature");
    const auto p = field<double>(event, "pressure");
    if (!std::isfinite(t)) throw Error("validation_error", "must be a finite number", "temperature");
    if (!std::isfinite(p)) throw Error("validation_error", "must be a finite number", "pressure");
    s.probes.push_back({t, p, infer(*s.system, {t, p})});
  } else if (type == "finalized") {
    if (s.phase != Phase::kTuning) throw wrong_phase(s.phase, "Tuning");
    s.phase = Phase::kTesting;
    s.test = run_test(s);
    s.phase = Phase::kDone;
  } else {
    throw Error("invalid_event", "unknown event type \"" + type + "\"", "type");
  }
  return s;
}

SessionState replay(const std::vector<json>& events) {
  SessionState s;
  for (const auto& e : events) s = apply(std::move(s), e);
  return s;
}

LearningStatus learning_status(const SessionState& s) {
  LearningStatus st;
  st.trials = s.learning.size();
  st.window = std::min(st.trials, kCriterionWindow);
  for (std::size_t i = st.trials - st.window; i < st.trials; ++i) {
    st.window_correct += s.learning[i].correct ? 1 : 0;
  }
  st.criterion_met = criterion_met(s.learning);
  return st;
}

json test_summary_to_json(const TestSummary& t) {
  json trials = json::array();
  for (std::size_t i = 0; i < t.trials.size(); ++i) {
    const auto& tr = t.trials[i];
    json row = case_to_json(tr.c);
    row["index"] = i;
    row["evidence_type"] = to_string(classify_trial(tr.c));
    row["verdict"] = tr.verdict ? json(verdict_string(*tr.verdict)) : json(nullptr);
    row["correct_answer"] = verdict_string(truth_of(tr.c));
    row["correct"] = tr.correct;
    trials.push_back(std::move(row));
  }
  return {{"trials", trials},
          {"accuracy", t.accuracy},
          {"consistent_accuracy", opt(t.consistent_accuracy)},
          {"mixed_accuracy", opt(t.mixed_accuracy)},
          {"trials_to_tune", t.trials_to_tune}};
}

json state_to_json(const SessionState& s) {
  json history = json::array();
  for (const auto& r : s.learning) {
    json row = case_to_json(r.c);
    row["index"] = r.trial_index;
    row["answer"] = verdict_string(r.answer);
    row["correct"] = r.correct;
    history.push_back(std::move(row));
  }
  json probes = json::array();
  for (const auto& p : s.probes) {
    probes.push_back({{"temperature", p.temperature},
                      {"pressure", p.pressure},
                      {"report", report_to_json(p.report)}});
  }
  const LearningStatus st = learning_status(s);
  json staged = nullptr;
  if (s.staged) {
    staged = {{"index", s.learning.size()},
              {"temperature", display_reading(s.staged->temperature)},
              {"pressure", display_reading(s.staged->pressure)}};
  }
  return {{"id", s.id},
          {"engine", to_string(s.engine)},
          {"seed", s.seed},
          {"phase", to_string(s.phase)},
          {"learning",
           {{"trials", st.trials},
            {"window", st.window},
            {"window_correct", st.window_correct},
            {"criterion_met", st.criterion_met},
            {"cap_reached", s.learning_cap_reached},
            {"history", history}}},
          {"staged_trial", staged},
          {"system", s.system ? system_to_json(*s.system) : json(nullptr)},
          {"probes", probes},
          {"test", s.test ? test_summary_to_json(*s.test) : json(nullptr)}};
}

json feedback_to_json(const AnswerFeedback& f) {
  return {{"trial_index", f.trial_index},
          {"correct", f.correct},
          {"correct_answer", verdict_string(f.correct_answer)},
          {"trials", f.status.trials},
          {"window", f.status.window},
          {"window_correct", f.status.window_correct},
          {"criterion_met", f.status.criterion_met},
          {"phase", to_string(f.phase)}};
}

SessionStore::SessionStore(std::filesystem::path data_dir) : data_dir_(std::move(data_dir)) {
  if (!data_dir_.empty()) std::filesystem::create_directories(data_dir_);
}

std::string SessionStore::fresh_id(std::uint64_t seed) {
  for (;;) {
    std::string id = hex16(derive_seed(seed, kIdStream, id_counter_++));
    if (sessions_.count(id) != 0) continue;
    if (!data_dir_.empty() && std::filesystem::exists(data_dir_ / (id + ".events.jsonl"))) continue;
    return id;
  }
}

void SessionStore::commit(Entry& e, const json& event) {
  SessionState next = apply(e.state, event);
  if (!data_dir_.empty()) {
    const std::string id = next.id;
    {
      std::ofstream log(data_dir_ / (id + ".events.jsonl"), std::ios::app);
      log << event.dump() << '\n';
      log.flush();
      if (!log) throw Error("storage_error", "cannot append to the event log");
    }
    const auto snap = data_dir_ / (id + ".snapshot.json");
    const auto tmp = data_dir_ / (id + ".snapshot.json.tmp");
    {
      std::ofstream out(tmp, std::ios::trunc);
      out << state_to_json(next).dump(2) << '\n';
      if (!out) throw Error("storage_error", "cannot write the snapshot");
    }
    std::filesystem::rename(tmp, snap);
  }
  e.events.push_back(event);
  e.state = std::move(next);
}

std::shared_ptr<SessionStore::Entry> SessionStore::entry(const std::string& id) {
  std::lock_guard lock(map_mutex_);
  if (auto it = sessions_.find(id); it != sessions_.end()) return it->second;
  const auto path = data_dir_ / (id + ".events.jsonl");
  if (data_dir_.empty() || !valid_id(id) || !std::filesystem::exists(path)) {
    throw Error("not_found", "no session with id \"" + id + "\"", "id");
  }
  auto e = std::make_shared<Entry>();
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    e->events.push_back(json::parse(line));
  }
  e->state = replay(e->events);
  sessions_.emplace(id, e);
  return e;
}

SessionState SessionStore::create(EngineKind engine, std::uint64_t seed) {
  auto e = std::make_shared<Entry>();
  std::lock_guard lock(map_mutex_);
  const std::string id = fresh_id(seed);
  std::lock_guard entry_lock(e->mutex);
  commit(*e, created_event(id, engine, seed));
  sessions_.emplace(id, e);
  return e->state;
}

SessionState SessionStore::get(const std::string& id) {
  auto e = entry(id);
  std::lock_guard lock(e->mutex);
  return e->state;
}

Case SessionStore::next_learning_trial(const std::string& id) {
  auto e = entry(id);
  std::lock_guard lock(e->mutex);
  if (e->state.phase != Phase::kLearning) throw wrong_phase(e->state.phase, "Learning");
  if (!e->state.staged) commit(*e, trial_staged_event(e->state.learning.size()));
  return *e->state.staged;
}

AnswerFeedback SessionStore::submit_answer(const std::string& id, Verdict answer) {
  auto e = entry(id);
  std::lock_guard lock(e->mutex);
  commit(*e, answer_event(answer));
  const SessionState& s = e->state;
  const TrialRecord& r = s.learning.back();
  return {r.trial_index, r.correct, truth_of(r.c), learning_status(s), s.phase};
}

SessionState SessionStore::put_system(const std::string& id, const UisSystem& sys) {
  auto e = entry(id);
  std::lock_guard lock(e->mutex);
  commit(*e, system_put_event(sys));
  return e->state;
}

UisSystem SessionStore::get_system(const std::string& id) {
  auto e = entry(id);
  std::lock_guard lock(e->mutex);
  if (!e->state.system) throw Error("not_found", "no system has been stored yet", "system");
  return *e->state.system;
}

BeliefReport SessionStore::test_case(const std::string& id, double temperature, double pressure) {
  auto e = entry(id);
  std::lock_guard lock(e->mutex);
  commit(*e, probe_event(temperature, pressure));
  return e->state.probes.back().report;
}

TestSummary SessionStore::finalize(const std::string& id) {
  auto e = entry(id);
  std::lock_guard lock(e->mutex);
  commit(*e, finalized_event());
  return *e->state.test;
}

std::vector<json> SessionStore::events(const std::string& id) {
  auto e = entry(id);
  std::lock_guard lock(e->mutex);
  return e->events;
}

}  // namespace uisbench
