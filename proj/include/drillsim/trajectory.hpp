#pragma once

// Per-point depth planning: a three-mode velocity damper driven by observed
// completion, a constrained cubic spline through the 32 knots, and the
// targets used by Repeat Drilling.

#include <iosfwd>
#include <limits>
#include <vector>

#include "drillsim/geometry.hpp"
#include "drillsim/sensing.hpp"
#include "drillsim/specimen.hpp"

namespace drillsim {

struct DamperParams {
  double c_lo = 0.5;
  double c_hi = 0.95;
  double v_full = 0.02;   // mm per drilling cycle
  double v_slow = 0.005;  // mm per drilling cycle
  double cycle_duration = 60.0;  // s, converts dt into cycles

  void validate() const;
};

// Depth increment for a point at `completion` over `dt` seconds.
// Completion outside [0, 1] is clamped (and logged).
double damper_step(double completion, double dt, const DamperParams& params);

struct SamplePointPlan {
  int index = 0;
  double angle = 0.0;
  double z_command = 0.0;  // mm below the original surface
  double completion_estimate = 0.0;
};

struct PlanObservation {
  double z_command = 0.0;
  double level = 0.0;
};

struct DrillPlan {
  DrillPath path;
  std::vector<SamplePointPlan> knots;
  // Per knot: (commanded depth, observed level) after every recognition.
  std::vector<std::vector<PlanObservation>> history;
};

// First-pass plan: every knot at damper_step(0) = one full-speed increment.
DrillPlan initial_plan(const DrillPath& path, const DamperParams& damper);

// Records the observation and advances each knot by damper_step(level).
DrillPlan update_plan(DrillPlan plan, const CompletionObservation& observation, const DamperParams& damper);

struct RepeatParams {
  int cycles = 10;
  double overcut = 0.02;  // mm past the extrapolated full-depth point
};

// Per-knot depth at which the observed level extrapolates to 1: a least-squares
// line of level against commanded depth over observations with
// 0.05 < level < 0.95, plus the overcut.
std::vector<double> repeat_targets(const DrillPlan& plan, const RepeatParams& params);

// One Repeat Drilling traversal: knots short of their target descend by v_slow.
DrillPlan repeat_step(DrillPlan plan, const std::vector<double>& targets, const DamperParams& damper);

class ClosedTrajectory {
 public:
  ClosedTrajectory() = default;
  ClosedTrajectory(DrillPath path, std::vector<SamplePointPlan> knots, std::vector<double> slopes);

  const std::vector<SamplePointPlan>& knots() const { return knots_; }
  const std::vector<double>& slopes() const { return slopes_; }
  double z_at(double theta) const;
  double dz_at(double theta) const;
  Vec3 point_at(double theta) const;

  // theta,x,y,z at `samples` evenly spaced angles.
  void write_csv(std::ostream& os, int samples) const;

 private:
  struct Local {
    std::size_t k;
    double t;  // [0, 1] within the segment
    double h;  // segment length, rad
  };
  Local locate(double theta) const;

  DrillPath path_;
  std::vector<SamplePointPlan> knots_;
  std::vector<double> slopes_;
};

// Periodic constrained cubic spline of z over theta. Knot slopes are the
// harmonic mean of the neighbouring secants, zero where the secants change
// sign, which keeps each segment within its knot values.
ClosedTrajectory build_spline(const DrillPath& path, const std::vector<SamplePointPlan>& knots);

}  // namespace drillsim
