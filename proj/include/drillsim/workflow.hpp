#pragma once

// Autonomous drilling state machine: drill/recognize loop, 80% gate into
// palpation, Repeat Drilling after a non-detachable verdict, and the
// deflection exception during drilling.

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "drillsim/config.hpp"
#include "drillsim/detector.hpp"
#include "drillsim/palpation.hpp"
#include "drillsim/perception.hpp"
#include "drillsim/specimen.hpp"

namespace drillsim {

enum class Phase { Initializing, DrillingCycle, Recognizing, Palpating, RepeatDrilling, Done, Halted };
inline constexpr std::size_t kPhaseCount = 7;
const char* to_string(Phase p);

enum class HaltReason { None, Exception, SensorStall };
const char* to_string(HaltReason r);

struct WorkflowState {
  Phase phase = Phase::Initializing;
  int cycles_left = 0;  // RepeatDrilling only
  int rounds = 0;       // repeat-drilling rounds started so far
  FlapState verdict = FlapState::NonDetachable;  // Done only
  HaltReason reason = HaltReason::None;          // Halted only

  bool terminal() const { return phase == Phase::Done || phase == Phase::Halted; }
  // Compact text form used in the event log, e.g. "RepeatDrilling(7)".
  std::string label() const;
  friend bool operator==(const WorkflowState&, const WorkflowState&) = default;
};

enum class EventKind {
  Initialized,
  CycleComplete,
  Recognized,
  Verdict,
  RepeatCycleComplete,
  ExceptionDeflection,
  SensorStall,
};
const char* to_string(EventKind k);

struct Event {
  EventKind kind = EventKind::Initialized;
  double timestamp = 0.0;
  double average = 0.0;      // Recognized
  bool cap_reached = false;  // Recognized: drilling-cycle cap forces palpation
  FlapState verdict = FlapState::NonDetachable;  // Verdict
  int detachable_count = 0;                      // Verdict
  double delta = 0.0;                            // ExceptionDeflection
  std::string note{};  // free text carried in the log payload, ignored by the machine
};

struct WorkflowLimits {
  double gate = 0.80;
  int round_cap = 5;
  int repeat_cycles = 10;
};

// Throws a workflow error when the event is illegal in `state`.
WorkflowState advance_state(const WorkflowState& state, const Event& event, const WorkflowLimits& limits);

// K consecutive over-threshold readings raise ExceptionDeflection.
class ExceptionMonitor {
 public:
  ExceptionMonitor(int k, double threshold) : k_(k), threshold_(threshold) {}
  std::optional<Event> update(const DetachabilityReading& reading);
  int streak() const { return streak_; }
  bool pending() const { return streak_ > 0; }
  void reset() { streak_ = 0; }

 private:
  int k_;
  double threshold_;
  int streak_ = 0;
};

struct LogEntry {
  double timestamp = 0.0;
  std::string state;  // state after the event
  std::string event;
  std::string payload;
  std::uint64_t digest = 0;  // FNV-1a chained over all previous entries
};

std::string event_payload(const Event& e);
Event parse_event(const std::string& name, const std::string& payload, double timestamp);
std::uint64_t entry_digest(std::uint64_t previous, const LogEntry& e);

void write_event_log(std::ostream& os, const std::vector<LogEntry>& log);
std::vector<LogEntry> read_event_log(std::istream& is);

// Re-runs the events through advance_state and checks every logged state and
// digest. Returns the reconstructed state trajectory.
std::vector<WorkflowState> replay_event_log(const std::vector<LogEntry>& log, const WorkflowLimits& limits);

struct TrialRecord {
  int trial_id = 0;
  std::uint64_t seed = 0;
  bool successful = false;
  bool detachable = false;
  int case_label = 4;
  double total_s = 0.0;
  double palpation_s = 0.0;
  double palpation_fraction = 0.0;
  bool halted = false;

  friend bool operator==(const TrialRecord&, const TrialRecord&) = default;
};

// Accumulated simulated time per phase, in clock ticks.
struct PhaseTimes {
  std::int64_t overhead = 0;  // initialization
  std::int64_t drilling = 0;
  std::int64_t recognizing = 0;
  std::int64_t palpating = 0;
  std::int64_t repeat = 0;

  std::int64_t sum() const { return overhead + drilling + recognizing + palpating + repeat; }
};

struct TrialOptions {
  int trial_id = 0;
  bool keep_traces = false;
  std::optional<std::filesystem::path> dump_dir{};
  int dump_stride = 1;
};

struct TrialResult {
  TrialRecord record;
  WorkflowState final_state;
  std::vector<LogEntry> log;
  std::vector<FlapVerdict> verdicts;
  PhaseTimes phases;
  std::int64_t total_ticks = 0;
  std::array<std::int64_t, kPhaseCount> observer_calls{};
  SpecimenTruth final_specimen;
  DrillPlan final_plan;
  CaseOutcome outcome;
  int drilling_cycles = 0;
  int repeat_rounds = 0;
  double max_plant_force = 0.0;
  double max_measured_force = 0.0;
  double max_stiffness = 0.0;
  std::optional<double> membrane_damage_time;
  std::optional<double> detach_time;     // flap became free during drilling
  std::optional<double> feed_hold_time;  // first over-threshold frame during drilling
  std::optional<double> halt_time;
  bool invalid = false;
  PerceptionStats perception;
};

WorkflowLimits limits_from(const SimConfig& cfg);

TrialResult run_trial(const SimConfig& cfg, std::uint64_t seed, const TrialOptions& options = {});
TrialResult run_trial(SpecimenTruth spec, const SimConfig& cfg, std::uint64_t seed,
                      const TrialOptions& options = {});

}  // namespace drillsim
