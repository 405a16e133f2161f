#include "drillsim/palpation.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>

#include <fmt/format.h>

#include "drillsim/error.hpp"

namespace drillsim {

const char* to_string(ToolState s) {
  switch (s) {
    case ToolState::Idle: return "Idle";
    case ToolState::Descending: return "Descending";
    case ToolState::Retracting: return "Retracting";
    case ToolState::Drilling: return "Drilling";
  }
  return "?";
}

const char* to_string(PointExit e) {
  switch (e) {
    case PointExit::DetectorDetachable: return "detector";
    case PointExit::ForceGuard: return "force-guard";
    case PointExit::TravelLimit: return "travel-limit";
    case PointExit::SensorStall: return "sensor-stall";
  }
  return "?";
}

void GuardParams::validate() const {
  if (!(f_max > 0.0 && v_z > 0.0 && max_velocity > 0.0 && travel_limit > 0.0 && retract_height > 0.0 &&
        retract_speed > 0.0)) {
    throw Error(ErrorKind::Config, "palpation/guard", "guard parameters must be positive");
  }
  if (v_z > max_velocity) {
    throw Error(ErrorKind::Config, "palpation/guard",
                fmt::format("descent velocity {} exceeds the limit {}", v_z, max_velocity));
  }
  if (margin_sigmas < 0.0 || contact_sigmas < 0.0) {
    throw Error(ErrorKind::Config, "palpation/guard", "sigma multipliers must be non-negative");
  }
}

std::array<StrategicPoint, 4> select_strategic_points(const std::vector<SamplePointPlan>& plan,
                                                      const DrillPath& path, double radius_fraction) {
  const int n = static_cast<int>(plan.size());
  if (n < 4) throw Error(ErrorKind::Planner, "palpation/select", "need at least 4 sample points");
  std::array<StrategicPoint, 4> out;
  for (int q = 0; q < 4; ++q) {
    int best = -1;
    for (int k = 0; k < n; ++k) {
      if (4 * k / n != q) continue;
      if (best < 0 || plan[static_cast<std::size_t>(k)].completion_estimate >
                          plan[static_cast<std::size_t>(best)].completion_estimate) {
        best = k;
      }
    }
    const double angle = plan[static_cast<std::size_t>(best)].angle;
    const double r = radius_fraction * path.radius;
    out[static_cast<std::size_t>(q)] = {{path.center.x + r * std::cos(angle), path.center.y + r * std::sin(angle)},
                                        plan[static_cast<std::size_t>(best)].index};
  }
  return out;
}

FlapState decide_flap(const std::vector<FlapState>& verdicts) {
  const auto n = std::count(verdicts.begin(), verdicts.end(), FlapState::Detachable);
  return n >= 3 ? FlapState::Detachable : FlapState::NonDetachable;
}

ForceReading sample_force(SpecimenTruth& spec, const DrillTool& tool, const ContactModel& contact,
                          ForceSensor& sensor, double timestamp) {
  double plant = 0.0;
  if (tool.tip_depth > 0.0) {
    ContactResult r = apply_contact_force(std::move(spec), tool.position, tool.tip_depth, contact);
    spec = std::move(r.specimen);
    plant = r.force_z;
  } else if (spec.flap_displacement != 0.0 || !(spec.flap_tilt == Vec2{})) {
    spec = relax_flap(std::move(spec));
  }
  return {sensor.sample(plant, timestamp), plant};
}

PointPalpationResult palpate_point(const StrategicPoint& point, PalpationContext& ctx) {
  const GuardParams& g = ctx.guard;
  g.validate();
  SpecimenTruth& spec = *ctx.spec;
  SimClock& clock = *ctx.clock;
  const double sigma = ctx.sensor->sigma();
  const double trip_level = g.f_max - g.margin_sigmas * sigma;
  const double contact_level = g.contact_sigmas * sigma;
  const double force_dt = static_cast<double>(SimClock::kForcePeriod) / SimClock::kTicksPerSecond;
  constexpr std::int64_t kStallTicks = 3 * SimClock::kFramePeriod;
  // A lone 3-sigma sample is routine over a long descent; contact needs a run.
  constexpr int kContactRun = 5;

  PointPalpationResult res;
  res.point = point;
  DrillTool tool{point.position, -g.retract_height, g.v_z, ToolState::Descending};
  const std::int64_t start = clock.ticks();
  std::int64_t last_frame = start;
  std::optional<double> contact_depth;
  int run = 0;
  double run_start = 0.0;
  double f_now = 0.0;
  DetachabilityReading reading;
  reading.threshold = ctx.frames->config().threshold;

  bool done = false;
  while (!done) {
    clock.advance(1);
    const std::int64_t tick = clock.ticks();
    const double now = clock.now();

    if (SimClock::is_force_tick(tick)) {
      const ForceReading f = sample_force(spec, tool, *ctx.contact, *ctx.sensor, now);
      f_now = f.sample.f_z;
      res.peak_force = std::max(res.peak_force, std::fabs(f_now));
      res.peak_plant_force = std::max(res.peak_plant_force, f.plant);
      if (tool.tip_depth > 0.0) res.max_stiffness = std::max(res.max_stiffness, ctx.contact->stiffness(spec));

      TraceRow row{now, tool.tip_depth, tool.descent_velocity, f_now, f.plant, reading.delta, reading.state, false};
      if (std::fabs(f_now) >= trip_level) {
        // Halt in this control step.
        tool.descent_velocity = 0.0;
        row.velocity = 0.0;
        row.guard_tripped = true;
        res.verdict = FlapState::NonDetachable;
        res.exit = PointExit::ForceGuard;
        done = true;
      } else {
        if (!contact_depth) {
          if (f_now > contact_level) {
            if (run++ == 0) run_start = tool.tip_depth;
            if (run >= kContactRun) contact_depth = run_start;
          } else {
            run = 0;
          }
        }
        const double limit = contact_depth ? *contact_depth + g.travel_limit : g.travel_limit;
        if (tool.tip_depth >= limit) {
          tool.descent_velocity = 0.0;
          row.velocity = 0.0;
          res.verdict = FlapState::NonDetachable;
          res.exit = PointExit::TravelLimit;
          res.no_contact = !contact_depth;
          done = true;
        }
      }
      if (ctx.keep_trace) res.trace.push_back(row);
      if (done) break;
      tool.tip_depth += tool.descent_velocity * force_dt;
    }

    if (SimClock::is_frame_tick(tick)) {
      if (ctx.frames->frame_available(tick)) {
        last_frame = tick;
        reading = ctx.frames->on_frame(spec, tick);
        res.peak_delta = std::max(res.peak_delta, std::fabs(reading.delta));
        if (reading.state == FlapState::Detachable && std::fabs(f_now) < g.f_max) {
          tool.descent_velocity = 0.0;
          res.verdict = FlapState::Detachable;
          res.exit = PointExit::DetectorDetachable;
          done = true;
        }
      } else if (tick - last_frame > kStallTicks) {
        tool.descent_velocity = 0.0;
        res.verdict = FlapState::NonDetachable;
        res.exit = PointExit::SensorStall;
        done = true;
      }
    }
  }

  // Retract to the safe height; the flap springs back once the tip leaves.
  tool.state = ToolState::Retracting;
  spec = relax_flap(std::move(spec));
  const double rise = tool.tip_depth + g.retract_height;
  clock.advance(static_cast<std::int64_t>(std::ceil(rise / g.retract_speed * SimClock::kTicksPerSecond)));
  res.duration = SimClock::seconds(clock.ticks() - start);
  return res;
}

FlapVerdict palpate_flap(const std::array<StrategicPoint, 4>& points, const PointPalpator& palpate) {
  FlapVerdict v;
  int no = 0;
  std::vector<FlapState> verdicts;
  for (const auto& p : points) {
    PointPalpationResult r = palpate(p);
    const bool stalled = r.exit == PointExit::SensorStall;
    verdicts.push_back(r.verdict);
    if (r.verdict == FlapState::Detachable) {
      ++v.detachable_count;
    } else {
      ++no;
    }
    v.per_point.push_back(std::move(r));
    if (stalled) {
      v.stalled = true;
      v.final = FlapState::NonDetachable;
      return v;
    }
    if (v.detachable_count >= 3 || no >= 2) break;
  }
  v.final = decide_flap(verdicts);
  return v;
}

void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& trace) {
  os << "timestamp,tip_z,f_z,delta,state\n";
  for (const auto& r : trace) {
    os << fmt::format("{:.6f},{:.6f},{:.6f},{:.6f},{}\n", r.timestamp, r.tip_depth, r.f_measured, r.delta,
                      to_string(r.detector_state));
  }
}

}  // namespace drillsim
