#include "drillsim/workflow.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "drillsim/error.hpp"
#include "drillsim/rng.hpp"
#include "drillsim/trajectory.hpp"

namespace drillsim {

const char* to_string(Phase p) {
  switch (p) {
    case Phase::Initializing: return "Initializing";
    case Phase::DrillingCycle: return "DrillingCycle";
    case Phase::Recognizing: return "Recognizing";
    case Phase::Palpating: return "Palpating";
    case Phase::RepeatDrilling: return "RepeatDrilling";
    case Phase::Done: return "Done";
    case Phase::Halted: return "Halted";
  }
  return "?";
}

const char* to_string(HaltReason r) {
  switch (r) {
    case HaltReason::None: return "None";
    case HaltReason::Exception: return "Exception";
    case HaltReason::SensorStall: return "SensorStall";
  }
  return "?";
}

const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::Initialized: return "Initialized";
    case EventKind::CycleComplete: return "CycleComplete";
    case EventKind::Recognized: return "Recognized";
    case EventKind::Verdict: return "Verdict";
    case EventKind::RepeatCycleComplete: return "RepeatCycleComplete";
    case EventKind::ExceptionDeflection: return "ExceptionDeflection";
    case EventKind::SensorStall: return "SensorStall";
  }
  return "?";
}

std::string WorkflowState::label() const {
  switch (phase) {
    case Phase::RepeatDrilling: return fmt::format("RepeatDrilling({})", cycles_left);
    case Phase::Done: return fmt::format("Done({})", to_string(verdict));
    case Phase::Halted: return fmt::format("Halted({})", to_string(reason));
    default: return to_string(phase);
  }
}

WorkflowState advance_state(const WorkflowState& state, const Event& event, const WorkflowLimits& limits) {
  auto illegal = [&]() -> WorkflowState {
    throw Error(ErrorKind::Workflow, "workflow/advance",
                fmt::format("event {} is illegal in state {}", to_string(event.kind), state.label()));
  };
  if (state.terminal()) return illegal();

  WorkflowState next = state;
  if (event.kind == EventKind::SensorStall) {
    next.phase = Phase::Halted;
    next.reason = HaltReason::SensorStall;
    return next;
  }
  switch (state.phase) {
    case Phase::Initializing:
      if (event.kind != EventKind::Initialized) return illegal();
      next.phase = Phase::DrillingCycle;
      return next;
    case Phase::DrillingCycle:
      if (event.kind == EventKind::CycleComplete) {
        next.phase = Phase::Recognizing;
        return next;
      }
      break;
    case Phase::Recognizing:
      if (event.kind != EventKind::Recognized) return illegal();
      next.phase = (event.average > limits.gate || event.cap_reached) ? Phase::Palpating : Phase::DrillingCycle;
      return next;
    case Phase::Palpating:
      if (event.kind != EventKind::Verdict) return illegal();
      if (event.verdict == FlapState::Detachable) {
        next.phase = Phase::Done;
        next.verdict = FlapState::Detachable;
      } else if (state.rounds >= limits.round_cap) {
        next.phase = Phase::Done;
        next.verdict = FlapState::NonDetachable;
      } else {
        next.phase = Phase::RepeatDrilling;
        next.cycles_left = limits.repeat_cycles;
        next.rounds = state.rounds + 1;
      }
      return next;
    case Phase::RepeatDrilling:
      if (event.kind == EventKind::RepeatCycleComplete) {
        next.cycles_left = state.cycles_left - 1;
        if (next.cycles_left <= 0) {
          next.cycles_left = 0;
          next.phase = Phase::Palpating;
        }
        return next;
      }
      break;
    default:
      break;
  }
  if (event.kind == EventKind::ExceptionDeflection &&
      (state.phase == Phase::DrillingCycle || state.phase == Phase::RepeatDrilling)) {
    next.phase = Phase::Halted;
    next.reason = HaltReason::Exception;
    next.cycles_left = 0;
    return next;
  }
  return illegal();
}

std::optional<Event> ExceptionMonitor::update(const DetachabilityReading& reading) {
  if (std::fabs(reading.delta) > threshold_) {
    ++streak_;
  } else {
    streak_ = 0;
  }
  if (streak_ >= k_) {
    Event e;
    e.kind = EventKind::ExceptionDeflection;
    e.timestamp = reading.timestamp;
    e.delta = reading.delta;
    return e;
  }
  return std::nullopt;
}

// ---- event log -------------------------------------------------------------

std::string event_payload(const Event& e) {
  std::string p;
  switch (e.kind) {
    case EventKind::Recognized:
      p = fmt::format("avg={:.17g} cap={}", e.average, e.cap_reached ? 1 : 0);
      break;
    case EventKind::Verdict:
      p = fmt::format("final={} count={}", to_string(e.verdict), e.detachable_count);
      break;
    case EventKind::ExceptionDeflection:
      p = fmt::format("delta={:.17g}", e.delta);
      break;
    default:
      break;
  }
  if (!e.note.empty()) p += p.empty() ? e.note : " " + e.note;
  return p.empty() ? "-" : p;
}

EventKind parse_event_kind(const std::string& name) {
  for (int i = 0; i <= static_cast<int>(EventKind::SensorStall); ++i) {
    const auto k = static_cast<EventKind>(i);
    if (name == to_string(k)) return k;
  }
  throw Error(ErrorKind::Workflow, "workflow/replay", fmt::format("unknown event '{}'", name));
}

Event parse_event(const std::string& name, const std::string& payload, double timestamp) {
  Event e;
  e.kind = parse_event_kind(name);
  e.timestamp = timestamp;
  if (payload == "-") return e;
  std::istringstream is(payload);
  std::string tok;
  std::string note;
  while (is >> tok) {
    const auto eq = tok.find('=');
    const std::string key = eq == std::string::npos ? tok : tok.substr(0, eq);
    const std::string val = eq == std::string::npos ? "" : tok.substr(eq + 1);
    try {
      if (e.kind == EventKind::Recognized && key == "avg") {
        e.average = std::stod(val);
      } else if (e.kind == EventKind::Recognized && key == "cap") {
        e.cap_reached = val == "1";
      } else if (e.kind == EventKind::Verdict && key == "final") {
        e.verdict = val == "Detachable" ? FlapState::Detachable : FlapState::NonDetachable;
      } else if (e.kind == EventKind::Verdict && key == "count") {
        e.detachable_count = std::stoi(val);
      } else if (e.kind == EventKind::ExceptionDeflection && key == "delta") {
        e.delta = std::stod(val);
      } else {
        note += note.empty() ? tok : " " + tok;
      }
    } catch (const std::exception&) {
      throw Error(ErrorKind::Workflow, "workflow/replay", fmt::format("bad payload field '{}'", tok));
    }
  }
  e.note = note;
  return e;
}

std::uint64_t entry_digest(std::uint64_t previous, const LogEntry& e) {
  const std::string text =
      fmt::format("{:016x}\t{:.7f}\t{}\t{}\t{}", previous, e.timestamp, e.state, e.event, e.payload);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void write_event_log(std::ostream& os, const std::vector<LogEntry>& log) {
  for (const auto& e : log) {
    os << fmt::format("{:.7f}\t{}\t{}\t{}\t{:016x}\n", e.timestamp, e.state, e.event, e.payload, e.digest);
  }
}

std::vector<LogEntry> read_event_log(std::istream& is) {
  std::vector<LogEntry> out;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::size_t pos = 0;
    while (true) {
      const auto tab = line.find('\t', pos);
      f.push_back(line.substr(pos, tab - pos));
      if (tab == std::string::npos) break;
      pos = tab + 1;
    }
    if (f.size() != 5) {
      throw Error(ErrorKind::Io, "workflow/log", fmt::format("line {}: expected 5 fields", lineno));
    }
    LogEntry e;
    try {
      e.timestamp = std::stod(f[0]);
      e.digest = std::stoull(f[4], nullptr, 16);
    } catch (const std::exception&) {
      throw Error(ErrorKind::Io, "workflow/log", fmt::format("line {}: bad number", lineno));
    }
    e.state = f[1];
    e.event = f[2];
    e.payload = f[3];
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<WorkflowState> replay_event_log(const std::vector<LogEntry>& log, const WorkflowLimits& limits) {
  std::vector<WorkflowState> states;
  WorkflowState s;
  std::uint64_t digest = 0;
  for (std::size_t i = 0; i < log.size(); ++i) {
    const LogEntry& e = log[i];
    digest = entry_digest(digest, e);
    if (digest != e.digest) {
      throw Error(ErrorKind::Workflow, "workflow/replay", fmt::format("digest mismatch at entry {}", i));
    }
    s = advance_state(s, parse_event(e.event, e.payload, e.timestamp), limits);
    if (s.label() != e.state) {
      throw Error(ErrorKind::Workflow, "workflow/replay",
                  fmt::format("entry {}: replay reached {} but log says {}", i, s.label(), e.state));
    }
    states.push_back(s);
  }
  return states;
}

// ---- trial runner ----------------------------------------------------------

WorkflowLimits limits_from(const SimConfig& cfg) {
  return {cfg.workflow.gate, cfg.workflow.round_cap, cfg.repeat.cycles};
}

namespace {

class TrialRunner {
 public:
  TrialRunner(SpecimenTruth spec, const SimConfig& cfg, std::uint64_t seed, const TrialOptions& options)
      : cfg_(cfg),
        seed_(seed),
        options_(options),
        spec_(std::move(spec)),
        limits_(limits_from(cfg)),
        pipeline_(cfg.camera, detector_config(cfg, spec_.path), perception_options(cfg, options), seed, options.trial_id),
        sensor_(cfg.force_sigma, seed),
        monitor_(cfg.workflow.debounce_frames, cfg.detector_threshold),
        collapse_gen_(rng::derive(seed, rng::kCollapse)) {
    plan_ = initial_plan(spec_.path, cfg_.damper);
  }

  TrialResult run() {
    initialize();
    while (!state_.terminal()) {
      const std::int64_t before = clock_.ticks();
      const Phase phase = state_.phase;
      switch (phase) {
        case Phase::DrillingCycle: drilling_cycle(false); break;
        case Phase::Recognizing: recognize(); break;
        case Phase::Palpating: palpate(); break;
        case Phase::RepeatDrilling: drilling_cycle(true); break;
        default:
          throw Error(ErrorKind::Workflow, "workflow/run", fmt::format("no handler for {}", state_.label()));
      }
      const std::int64_t spent = clock_.ticks() - before;
      switch (phase) {
        case Phase::DrillingCycle: result_.phases.drilling += spent; break;
        case Phase::Recognizing: result_.phases.recognizing += spent; break;
        case Phase::Palpating: result_.phases.palpating += spent; break;
        case Phase::RepeatDrilling: result_.phases.repeat += spent; break;
        default: break;
      }
    }
    return finish();
  }

 private:
  static DetectorConfig detector_config(const SimConfig& cfg, const DrillPath& path) {
    DetectorConfig d = make_detector_config(cfg.camera, path, cfg.crop_size);
    d.threshold = cfg.detector_threshold;
    d.ring_width = cfg.ring_width;
    d.hsv = cfg.hsv;
    return d;
  }

  static PerceptionOptions perception_options(const SimConfig& cfg, const TrialOptions& options) {
    PerceptionOptions p;
    p.elide_static_frames = cfg.elide_static_frames;
    p.dump_dir = options.dump_dir;
    p.dump_stride = options.dump_stride;
    p.dropout_start = cfg.faults.dropout_start;
    p.dropout_duration = cfg.faults.dropout_duration;
    return p;
  }

  void emit(Event e) {
    e.timestamp = clock_.now();
    state_ = advance_state(state_, e, limits_);
    LogEntry entry{e.timestamp, state_.label(), to_string(e.kind), event_payload(e), 0};
    entry.digest = entry_digest(digest_, entry);
    digest_ = entry.digest;
    result_.log.push_back(std::move(entry));
  }

  void initialize() {
    const std::int64_t before = clock_.ticks();
    pipeline_.capture_initial(spec_, clock_.ticks());
    clock_.advance(SimClock::to_ticks(cfg_.workflow.init_s));
    result_.phases.overhead += clock_.ticks() - before;
    emit({EventKind::Initialized});
  }

  void note_membrane() {
    if (!spec_.membrane_intact && !result_.membrane_damage_time) {
      result_.membrane_damage_time = clock_.now();
      spdlog::info("trial {}: membrane damaged at t={:.3f}s", options_.trial_id, clock_.now());
    }
  }

  void drill_knot(const ClosedTrajectory& traj, int k) {
    const bool was_free = spec_.detachable();
    const double z = traj.z_at(spec_.path.sample_angle(k));
    spec_ = apply_drill_pass(std::move(spec_), k, z, cfg_.contact);
    const bool inject = !repeat_ && cfg_.faults.collapse_cycle == result_.drilling_cycles + 1 &&
                        k == spec_.path.sample_count / 2;
    if (inject) {
      for (auto& p : spec_.points) p.drilled_depth = std::max(p.drilled_depth, p.thickness);
      ++spec_.groove_revision;
    }
    if (!was_free && spec_.detachable()) {
      result_.detach_time = clock_.now();
      std::uniform_real_distribution<double> u(0.0, 1.0);
      if (inject || u(collapse_gen_) < cfg_.workflow.collapse_probability) {
        spec_ = collapse_flap(std::move(spec_), cfg_.workflow.collapse_sag);
        spdlog::info("trial {}: flap dropped at t={:.3f}s", options_.trial_id, clock_.now());
      }
    }
    note_membrane();
  }

  // One traversal of the closed trajectory with the detector running. The
  // feed holds while the latest reading is over threshold; K such frames in
  // a row halt the trial.
  void drilling_cycle(bool repeat) {
    repeat_ = repeat;
    const ClosedTrajectory traj = build_spline(spec_.path, plan_.knots);
    const int n = spec_.path.sample_count;
    const std::int64_t cycle_ticks = SimClock::to_ticks(cfg_.workflow.cycle_s);
    const std::int64_t start = clock_.ticks();
    std::int64_t hold = 0;
    int k = 0;
    auto knot_tick = [&](int i) {
      return start + hold + static_cast<std::int64_t>((i + 0.5) * static_cast<double>(cycle_ticks) / n);
    };
    monitor_.reset();
    while (true) {
      const std::int64_t end = start + cycle_ticks + hold;
      const std::int64_t t = clock_.ticks();
      const std::int64_t next_frame = (t / SimClock::kFramePeriod + 1) * SimClock::kFramePeriod;
      const std::int64_t horizon = std::min(next_frame, end);
      while (k < n && knot_tick(k) <= horizon) {
        clock_.advance_to(std::max(clock_.ticks(), knot_tick(k)));
        drill_knot(traj, k);
        ++k;
      }
      if (next_frame > end) {
        clock_.advance_to(end);
        break;
      }
      clock_.advance_to(next_frame);
      if (!pipeline_.frame_available(next_frame)) continue;
      const bool last_frame = next_frame + SimClock::kFramePeriod > end;
      const DetachabilityReading r = pipeline_.on_frame(spec_, next_frame, monitor_.pending() || last_frame);
      if (std::optional<Event> ex = monitor_.update(r)) {
        result_.halt_time = clock_.now();
        emit(*ex);
        return;
      }
      if (monitor_.pending()) {
        if (!result_.feed_hold_time) result_.feed_hold_time = clock_.now();
        hold += SimClock::kFramePeriod;
      }
    }
    if (repeat) {
      plan_ = repeat_step(std::move(plan_), targets_, cfg_.damper);
      Event e{EventKind::RepeatCycleComplete};
      e.note = fmt::format("round={} membrane={}", state_.rounds, spec_.membrane_intact ? "intact" : "damaged");
      emit(e);
    } else {
      ++result_.drilling_cycles;
      Event e{EventKind::CycleComplete};
      e.note = fmt::format("cycle={} membrane={}", result_.drilling_cycles,
                           spec_.membrane_intact ? "intact" : "damaged");
      emit(e);
    }
  }

  void recognize() {
    ++result_.observer_calls[static_cast<std::size_t>(state_.phase)];
    const CompletionObservation obs =
        observe_completion(spec_, cfg_.observer, rng::derive(seed_, rng::kObserver, ++recognitions_));
    clock_.advance(SimClock::to_ticks(cfg_.workflow.recognition_s));
    plan_ = update_plan(std::move(plan_), obs, cfg_.damper);
    Event e{EventKind::Recognized};
    e.average = obs.average;
    e.cap_reached = result_.drilling_cycles >= cfg_.workflow.max_drilling_cycles;
    emit(e);
  }

  void palpate() {
    const auto points = select_strategic_points(plan_.knots, spec_.path, cfg_.workflow.strategic_radius_fraction);
    PalpationContext ctx{&spec_, &cfg_.contact, &sensor_, &pipeline_, &clock_, cfg_.guard, options_.keep_traces};
    FlapVerdict v = palpate_flap(points, [&](const StrategicPoint& p) { return palpate_point(p, ctx); });
    note_membrane();
    std::string where;
    for (const auto& r : v.per_point) {
      where += fmt::format("{}{}:{}", where.empty() ? "" : ",", r.point.source_index,
                           r.verdict == FlapState::Detachable ? 'D' : 'N');
      result_.max_plant_force = std::max(result_.max_plant_force, r.peak_plant_force);
      result_.max_measured_force = std::max(result_.max_measured_force, r.peak_force);
      result_.max_stiffness = std::max(result_.max_stiffness, r.max_stiffness);
    }
    const bool stalled = v.stalled;
    Event e{stalled ? EventKind::SensorStall : EventKind::Verdict};
    e.verdict = v.final;
    e.detachable_count = v.detachable_count;
    e.note = "points=" + where;
    result_.verdicts.push_back(std::move(v));
    emit(e);
    if (state_.phase == Phase::RepeatDrilling) {
      targets_ = repeat_targets(plan_, cfg_.repeat);
      result_.repeat_rounds = state_.rounds;
    }
  }

  TrialResult finish() {
    result_.final_state = state_;
    result_.total_ticks = clock_.ticks();
    result_.final_specimen = spec_;
    result_.final_plan = plan_;
    result_.perception = pipeline_.stats();
    result_.invalid = state_.phase == Phase::Halted && state_.reason == HaltReason::SensorStall;

    const bool verdict_detachable =
        (state_.phase == Phase::Done && state_.verdict == FlapState::Detachable) ||
        (state_.phase == Phase::Halted && state_.reason == HaltReason::Exception);
    const FlapState verdict = verdict_detachable ? FlapState::Detachable : FlapState::NonDetachable;
    result_.outcome = ground_truth_case(spec_, verdict, cfg_.workflow.forcible_web_limit);

    TrialRecord& rec = result_.record;
    rec.trial_id = options_.trial_id;
    rec.seed = seed_;
    rec.detachable = verdict_detachable;
    rec.case_label = static_cast<int>(result_.outcome.label);
    rec.successful = result_.outcome.successful && !result_.invalid;
    rec.total_s = SimClock::seconds(result_.total_ticks);
    rec.palpation_s = SimClock::seconds(result_.phases.palpating);
    rec.palpation_fraction = rec.total_s > 0.0 ? rec.palpation_s / rec.total_s : 0.0;
    rec.halted = state_.phase == Phase::Halted;
    return std::move(result_);
  }

  const SimConfig& cfg_;
  std::uint64_t seed_;
  TrialOptions options_;
  SpecimenTruth spec_;
  WorkflowLimits limits_;
  FramePipeline pipeline_;
  ForceSensor sensor_;
  ExceptionMonitor monitor_;
  std::mt19937_64 collapse_gen_;
  SimClock clock_;
  WorkflowState state_;
  DrillPlan plan_;
  std::vector<double> targets_;
  TrialResult result_;
  std::uint64_t digest_ = 0;
  std::uint64_t recognitions_ = 0;
  bool repeat_ = false;
};

}  // namespace

TrialResult run_trial(SpecimenTruth spec, const SimConfig& cfg, std::uint64_t seed, const TrialOptions& options) {
  cfg.validate();
  return TrialRunner(std::move(spec), cfg, seed, options).run();
}

TrialResult run_trial(const SimConfig& cfg, std::uint64_t seed, const TrialOptions& options) {
  return run_trial(generate_specimen(seed, cfg.specimen), cfg, seed, options);
}

}  // namespace drillsim
