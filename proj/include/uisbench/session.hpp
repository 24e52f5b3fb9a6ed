#pragma once

// Participant protocol as an event-sourced phase machine.
//
// Every state change is an event; apply() is pure, so a session is fully
// determined by its event list. Learning and test cases are derived from
// the session seed and the trial index, never stored.

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "uisbench/domain.hpp"
#include "uisbench/engines.hpp"

namespace uisbench {

enum class Phase { kLearning, kBuilding, kTuning, kTesting, kDone };

std::string_view to_string(Phase p);
Phase phase_from_string(std::string_view s);

inline constexpr std::size_t kSessionTestTrials = 30;

struct ProbeRecord {
  double temperature = 0.0;
  double pressure = 0.0;
  BeliefReport report;
};

struct TestTrial {
  Case c;
  std::optional<Verdict> verdict;  // absent when inference failed
  bool correct = false;
};

struct TestSummary {
  std::vector<TestTrial> trials;
  double accuracy = 0.0;
  std::optional<double> consistent_accuracy;
  std::optional<double> mixed_accuracy;
  std::size_t trials_to_tune = 0;
};

struct SessionState {
  std::string id;
  EngineKind engine = EngineKind::kIndependence;
  std::uint64_t seed = 0;
  Phase phase = Phase::kLearning;
  std::vector<TrialRecord> learning;
  std::optional<Case> staged;
  bool learning_cap_reached = false;
  std::optional<UisSystem> system;
  std::vector<ProbeRecord> probes;
  std::optional<TestSummary> test;
};

/// Case shown on learning trial `index` of a session with this seed.
Case learning_case(std::uint64_t seed, std::size_t index);
/// Case used for final test trial `index`.
Case session_test_case(std::uint64_t seed, std::size_t index);

// Event constructors. Events are JSON objects with a "type" field.
nlohmann::json created_event(const std::string& id, EngineKind engine, std::uint64_t seed);
nlohmann::json trial_staged_event(std::size_t index);
nlohmann::json answer_event(Verdict v);
nlohmann::json system_put_event(const UisSystem& sys);
nlohmann::json probe_event(double temperature, double pressure);
nlohmann::json finalized_event();

/// Applies one event. Throws Error("wrong_phase"), Error("no_staged_trial")
/// etc. when the event is not admissible in the current state.
SessionState apply(SessionState state, const nlohmann::json& event);
SessionState replay(const std::vector<nlohmann::json>& events);

nlohmann::json state_to_json(const SessionState& s);
nlohmann::json test_summary_to_json(const TestSummary& t);

struct LearningStatus {
  std::size_t trials = 0;
  std::size_t window = 0;          // trials in the rolling window
  std::size_t window_correct = 0;  // correct answers in that window
  bool criterion_met = false;
};

LearningStatus learning_status(const SessionState& s);

struct AnswerFeedback {
  std::size_t trial_index = 0;
  bool correct = false;
  Verdict correct_answer = Verdict::kWorking;
  LearningStatus status;
  Phase phase = Phase::kLearning;
};

nlohmann::json feedback_to_json(const AnswerFeedback& f);

/// Sessions in memory, optionally persisted under data_dir as
/// <id>.events.jsonl (append-only) and <id>.snapshot.json. Calls on one
/// session are serialized; distinct sessions proceed independently.
class SessionStore {
 public:
  explicit SessionStore(std::filesystem::path data_dir = {});

  SessionState create(EngineKind engine, std::uint64_t seed);
  SessionState get(const std::string& id);
  /// Stages a learning case (or returns the one already staged).
  Case next_learning_trial(const std::string& id);
  AnswerFeedback submit_answer(const std::string& id, Verdict answer);
  /// Throws Error("kind_mismatch"), or ValidationFailure listing every
  /// invalid field.
  SessionState put_system(const std::string& id, const UisSystem& sys);
  UisSystem get_system(const std::string& id);
  BeliefReport test_case(const std::string& id, double temperature, double pressure);
  TestSummary finalize(const std::string& id);

  std::vector<nlohmann::json> events(const std::string& id);
  const std::filesystem::path& data_dir() const { return data_dir_; }

 private:
  struct Entry {
    std::mutex mutex;
    SessionState state;
    std::vector<nlohmann::json> events;
  };

  std::shared_ptr<Entry> entry(const std::string& id);
  // Applies, records and persists one event; caller holds the entry lock.
  void commit(Entry& e, const nlohmann::json& event);
  std::string fresh_id(std::uint64_t seed);

  std::filesystem::path data_dir_;
  std::mutex map_mutex_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
  std::uint64_t id_counter_ = 0;
};

/// Field-level validation failure from put_system.
class ValidationFailure : public Error {
 public:
  explicit ValidationFailure(std::vector<FieldError> errors);
  const std::vector<FieldError>& errors() const { return errors_; }

 private:
  std::vector<FieldError> errors_;
};

}  // namespace uisbench
