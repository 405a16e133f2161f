#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "drillsim/error.hpp"
#include "drillsim/palpation.hpp"
#include "test_support.hpp"

using namespace drillsim;
using namespace drillsim::testing;

namespace {

// Uniform 0.3 mm shell with `web_total` spread evenly over the 32 points.
SpecimenTruth with_web(double web_total) {
  SpecimenParams p;
  p.thickness_mean = 0.3;
  p.thickness_sigma = 0.0;
  p.springback_max = 0.0;
  SpecimenTruth s = generate_specimen(3, p);
  for (auto& pt : s.points) pt.drilled_depth = 0.3 - web_total / 32.0;
  ++s.groove_revision;
  return s;
}

struct Rig {
  SpecimenTruth spec;
  ContactModel contact;
  ForceSensor sensor{0.01, 17};
  CameraModel cam;
  FramePipeline frames;
  SimClock clock;
  PalpationContext ctx;

  explicit Rig(SpecimenTruth s, PerceptionOptions opts = {})
      : spec(std::move(s)), frames(cam, make_detector_config(cam, spec.path), opts, 5, 1) {
    frames.capture_initial(spec, 0);
    ctx.spec = &spec;
    ctx.contact = &contact;
    ctx.sensor = &sensor;
    ctx.frames = &frames;
    ctx.clock = &clock;
  }

  PointPalpationResult press(Vec2 at) { return palpate_point({at, 0}, ctx); }
};

std::vector<FlapState> combo(int bits) {
  std::vector<FlapState> v;
  for (int i = 0; i < 4; ++i) v.push_back((bits >> i) & 1 ? FlapState::Detachable : FlapState::NonDetachable);
  return v;
}

}  // namespace

TEST(ThreeOfFour, AllSixteenCombinations) {
  for (int bits = 0; bits < 16; ++bits) {
    const auto v = combo(bits);
    const int yes = __builtin_popcount(static_cast<unsigned>(bits));
    EXPECT_EQ(decide_flap(v), yes >= 3 ? FlapState::Detachable : FlapState::NonDetachable) << bits;
  }
}

TEST(ThreeOfFour, EarlyExitAgreesWithFullEvaluation) {
  for (int bits = 0; bits < 16; ++bits) {
    const auto v = combo(bits);
    int calls = 0;
    std::array<StrategicPoint, 4> pts{};
    for (int i = 0; i < 4; ++i) pts[static_cast<std::size_t>(i)].source_index = i;
    const FlapVerdict fv = palpate_flap(pts, [&](const StrategicPoint& p) {
      ++calls;
      PointPalpationResult r;
      r.point = p;
      r.verdict = v[static_cast<std::size_t>(p.source_index)];
      return r;
    });
    EXPECT_EQ(fv.final, decide_flap(v)) << bits;
    // Stops as soon as the prefix decides.
    int yes = 0, no = 0, needed = 0;
    for (auto s : v) {
      ++needed;
      (s == FlapState::Detachable ? yes : no)++;
      if (yes >= 3 || no >= 2) break;
    }
    EXPECT_EQ(calls, needed) << bits;
    EXPECT_EQ(static_cast<int>(fv.per_point.size()), needed);
  }
}

TEST(ThreeOfFour, StallAbortsImmediately) {
  std::array<StrategicPoint, 4> pts{};
  int calls = 0;
  const FlapVerdict fv = palpate_flap(pts, [&](const StrategicPoint&) {
    ++calls;
    PointPalpationResult r;
    r.exit = PointExit::SensorStall;
    return r;
  });
  EXPECT_EQ(calls, 1);
  EXPECT_TRUE(fv.stalled);
  EXPECT_EQ(fv.final, FlapState::NonDetachable);
}

TEST(StrategicPoints, BestPerQuadrantMovedInward) {
  DrillPath path;
  std::vector<SamplePointPlan> plan;
  for (int k = 0; k < 32; ++k) plan.push_back({k, path.sample_angle(k), 0.1, 0.5});
  plan[5].completion_estimate = 0.9;
  plan[9].completion_estimate = 0.9;  // tie across quadrants is irrelevant
  plan[17].completion_estimate = 0.7;
  plan[18].completion_estimate = 0.7;  // tie within a quadrant goes to the lower index
  const auto pts = select_strategic_points(plan, path);
  EXPECT_EQ(pts[0].source_index, 5);
  EXPECT_EQ(pts[1].source_index, 9);
  EXPECT_EQ(pts[2].source_index, 17);
  EXPECT_EQ(pts[3].source_index, 24);
  for (const auto& p : pts) EXPECT_NEAR(norm(p.position - path.center), 0.75 * path.radius, 1e-12);
  plan.resize(3);
  EXPECT_THROW(select_strategic_points(plan, path), Error);
}

TEST(Guard, RejectsUnsafeVelocity) {
  GuardParams g;
  EXPECT_NO_THROW(g.validate());
  g.v_z = 0.2;
  EXPECT_THROW(g.validate(), Error);
}

TEST(Palpate, AttachedFlapTripsGuardAndHalts) {
  Rig rig(with_web(3.2));
  const auto r = rig.press({2.0, 1.0});
  EXPECT_EQ(r.verdict, FlapState::NonDetachable);
  EXPECT_EQ(r.exit, PointExit::ForceGuard);
  ASSERT_FALSE(r.trace.empty());
  const TraceRow& last = r.trace.back();
  EXPECT_TRUE(last.guard_tripped);
  EXPECT_EQ(last.velocity, 0.0);
  for (std::size_t i = 0; i + 1 < r.trace.size(); ++i) EXPECT_FALSE(r.trace[i].guard_tripped);
  const double bound = rig.ctx.guard.f_max + r.max_stiffness * rig.ctx.guard.v_z / 128.0;
  EXPECT_LE(r.peak_plant_force, bound);
  EXPECT_LT(r.peak_delta, 0.03);
  EXPECT_TRUE(rig.spec.membrane_intact);
  // Retracted and relaxed.
  EXPECT_EQ(rig.spec.flap_displacement, 0.0);
}

TEST(Palpate, ThinWebStillReadsNonDetachable) {
  Rig rig(with_web(0.05));
  const auto r = rig.press({0.0, -2.5});
  EXPECT_EQ(r.verdict, FlapState::NonDetachable);
  EXPECT_LT(r.peak_delta, 0.03);
}

TEST(Palpate, FreeFlapReadsDetachableBelowForceLimit) {
  Rig rig(with_web(0.0));
  const auto r = rig.press({-2.0, 2.0});
  EXPECT_EQ(r.verdict, FlapState::Detachable);
  EXPECT_EQ(r.exit, PointExit::DetectorDetachable);
  EXPECT_LT(r.peak_plant_force, rig.ctx.guard.f_max);
  EXPECT_GT(r.peak_delta, 0.12);
  EXPECT_TRUE(rig.spec.membrane_intact);
}

TEST(Palpate, CameraDropoutStalls) {
  PerceptionOptions opts;
  opts.dropout_start = 0.0;
  opts.dropout_duration = 1e6;
  Rig rig(with_web(3.2), opts);
  const auto r = rig.press({2.0, 0.0});
  EXPECT_EQ(r.exit, PointExit::SensorStall);
  EXPECT_EQ(r.verdict, FlapState::NonDetachable);
}

TEST(Palpate, DurationMatchesClock) {
  Rig rig(with_web(3.2));
  const auto t0 = rig.clock.ticks();
  const auto r = rig.press({2.0, 1.0});
  EXPECT_EQ(r.duration, SimClock::seconds(rig.clock.ticks() - t0));
}

TEST(Palpate, NoForceAboveTheShell) {
  SpecimenTruth s = with_web(3.2);
  ForceSensor quiet(0.0, 1);
  DrillTool tool{{1.0, 0.0}, -0.5, 0.0, ToolState::Idle};
  EXPECT_EQ(sample_force(s, tool, ContactModel{}, quiet, 0.0).plant, 0.0);
  tool.tip_depth = 0.1;
  EXPECT_NEAR(sample_force(s, tool, ContactModel{}, quiet, 0.0).plant, 2.0 * 3.2 * 0.1, 1e-12);
}

TEST(Trace, CsvHeaderAndRows) {
  std::ostringstream os;
  write_trace_csv(os, {TraceRow{0.5, 0.1, 0.05, 0.2, 0.2, 0.01, FlapState::NonDetachable, false}});
  EXPECT_EQ(os.str(), "timestamp,tip_z,f_z,delta,state\n0.500000,0.100000,0.200000,0.010000,NonDetachable\n");
}
