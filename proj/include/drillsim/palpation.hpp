#pragma once

// Safe palpation: press the flap at 4 strategic points at a slow descent
// velocity while a force guard and the deflection detector run, then apply
// the 3-of-4 rule.

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "drillsim/detector.hpp"
#include "drillsim/geometry.hpp"
#include "drillsim/perception.hpp"
#include "drillsim/sensing.hpp"
#include "drillsim/specimen.hpp"
#include "drillsim/trajectory.hpp"

namespace drillsim {

enum class ToolState { Idle, Descending, Retracting, Drilling };
const char* to_string(ToolState s);

struct DrillTool {
  Vec2 position;            // mm, world plane
  double tip_depth = -2.0;  // mm below the original surface (negative = above)
  double descent_velocity = 0.0;  // mm/s, positive downward
  ToolState state = ToolState::Idle;
};

struct GuardParams {
  double f_max = 0.40;            // N
  double v_z = 0.05;              // mm/s descent speed
  double max_velocity = 0.10;     // mm/s, commanded speeds are checked against it
  double travel_limit = 1.0;      // mm below the contact estimate
  double retract_height = 2.0;    // mm above the original surface
  double retract_speed = 1.0;     // mm/s
  // The guard trips at f_max - margin_sigmas * sigma_f so sensor noise cannot
  // hide a plant force above f_max.
  double margin_sigmas = 3.0;
  double contact_sigmas = 3.0;    // contact onset at |F| > contact_sigmas * sigma_f

  void validate() const;
};

struct StrategicPoint {
  Vec2 position;
  int source_index = 0;
};

// Highest completion estimate in each quadrant (ties to the lower index),
// moved radially inward to `radius_fraction` of the path radius.
std::array<StrategicPoint, 4> select_strategic_points(const std::vector<SamplePointPlan>& plan,
                                                      const DrillPath& path, double radius_fraction = 0.75);

enum class PointExit { DetectorDetachable, ForceGuard, TravelLimit, SensorStall };
const char* to_string(PointExit e);

struct TraceRow {
  double timestamp = 0.0;
  double tip_depth = 0.0;
  double velocity = 0.0;
  double f_measured = 0.0;
  double f_plant = 0.0;
  double delta = 0.0;
  FlapState detector_state = FlapState::NonDetachable;
  bool guard_tripped = false;
};

struct PointPalpationResult {
  StrategicPoint point;
  FlapState verdict = FlapState::NonDetachable;
  PointExit exit = PointExit::TravelLimit;
  bool no_contact = false;
  double peak_force = 0.0;        // measured
  double peak_plant_force = 0.0;  // applied by the plant
  double peak_delta = 0.0;
  double max_stiffness = 0.0;     // plant stiffness seen during the press, N/mm
  double duration = 0.0;          // s, including the retract
  std::vector<TraceRow> trace;
};

struct FlapVerdict {
  std::vector<PointPalpationResult> per_point;
  int detachable_count = 0;
  FlapState final = FlapState::NonDetachable;
  bool stalled = false;
};

// Final state from up to four verdicts: Detachable iff at least 3 say so.
FlapState decide_flap(const std::vector<FlapState>& verdicts);

// Shared state for one palpation run.
struct PalpationContext {
  SpecimenTruth* spec = nullptr;
  const ContactModel* contact = nullptr;
  ForceSensor* sensor = nullptr;
  FramePipeline* frames = nullptr;
  SimClock* clock = nullptr;
  GuardParams guard;
  bool keep_trace = true;
};

struct ForceReading {
  ForceSample sample;
  double plant = 0.0;
};

// Plant force for the current tool pose (updating the flap pose) plus sensor noise.
ForceReading sample_force(SpecimenTruth& spec, const DrillTool& tool, const ContactModel& contact,
                          ForceSensor& sensor, double timestamp);

PointPalpationResult palpate_point(const StrategicPoint& point, PalpationContext& ctx);

using PointPalpator = std::function<PointPalpationResult(const StrategicPoint&)>;

// Sequential palpation with early exit once 3 Detachable or 2 NonDetachable
// verdicts decide the outcome. A stall aborts immediately.
FlapVerdict palpate_flap(const std::array<StrategicPoint, 4>& points, const PointPalpator& palpate);

// timestamp,tip_z,f_z,delta,state
void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& trace);

}  // namespace drillsim
