#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "drillsim/error.hpp"
#include "drillsim/trajectory.hpp"

using namespace drillsim;

namespace {

std::vector<SamplePointPlan> random_knots(std::mt19937_64& gen, int n, bool jitter_angles) {
  std::uniform_real_distribution<double> z(0.0, 0.4);
  std::uniform_real_distribution<double> j(-0.3, 0.3);
  std::vector<SamplePointPlan> k;
  const double step = kTwoPi / n;
  for (int i = 0; i < n; ++i) {
    const double a = i * step + (jitter_angles ? j(gen) * step : 0.0);
    k.push_back({i, a, z(gen), 0.0});
  }
  return k;
}

CompletionObservation levels(std::vector<double> v) {
  CompletionObservation o;
  o.levels = std::move(v);
  return o;
}

}  // namespace

TEST(Damper, ThreeModes) {
  DamperParams d;
  EXPECT_EQ(damper_step(0.0, 60.0, d), d.v_full);
  EXPECT_EQ(damper_step(0.49, 60.0, d), d.v_full);
  EXPECT_EQ(damper_step(0.5, 60.0, d), d.v_slow);
  EXPECT_EQ(damper_step(0.94, 60.0, d), d.v_slow);
  EXPECT_EQ(damper_step(0.95, 60.0, d), 0.0);
  EXPECT_EQ(damper_step(1.0, 60.0, d), 0.0);
  EXPECT_DOUBLE_EQ(damper_step(0.0, 30.0, d), 0.5 * d.v_full);
}

TEST(Damper, OutOfRangeCompletionIsClamped) {
  DamperParams d;
  EXPECT_EQ(damper_step(-0.2, 60.0, d), d.v_full);
  EXPECT_EQ(damper_step(1.3, 60.0, d), 0.0);
  EXPECT_EQ(damper_step(std::nan(""), 60.0, d), d.v_full);
}

TEST(Damper, ValidatesOrdering) {
  DamperParams d;
  d.c_lo = 0.97;
  EXPECT_THROW(d.validate(), Error);
  d = {};
  d.v_slow = 0.05;
  EXPECT_THROW(d.validate(), Error);
}

TEST(Plan, InitialAndUpdate) {
  DrillPath path;
  DamperParams d;
  DrillPlan p = initial_plan(path, d);
  ASSERT_EQ(p.knots.size(), 32u);
  for (const auto& k : p.knots) EXPECT_EQ(k.z_command, d.v_full);
  std::vector<double> lv(32, 0.2);
  lv[0] = 0.7;
  lv[1] = 0.99;
  p = update_plan(p, levels(lv), d);
  EXPECT_EQ(p.knots[0].z_command, d.v_full + d.v_slow);
  EXPECT_EQ(p.knots[1].z_command, d.v_full);
  EXPECT_EQ(p.knots[2].z_command, 2 * d.v_full);
  EXPECT_EQ(p.knots[0].completion_estimate, 0.7);
  ASSERT_EQ(p.history[0].size(), 1u);
  EXPECT_EQ(p.history[0][0].z_command, d.v_full);
  EXPECT_THROW(update_plan(p, levels({0.1}), d), Error);
}

TEST(Repeat, LinearFitExtrapolatesToFullDepth) {
  DrillPath path;
  DamperParams d;
  DrillPlan p = initial_plan(path, d);
  // Level grows linearly with depth on a 0.3 mm shell, plus one saturated reading.
  for (double z : {0.02, 0.06, 0.12, 0.2, 0.29}) {
    for (auto& k : p.knots) k.z_command = z;
    p = update_plan(p, levels(std::vector<double>(32, std::min(z / 0.3, 1.0) > 0.95 ? 1.0 : z / 0.3)), d);
  }
  const auto t = repeat_targets(p, RepeatParams{});
  for (double v : t) EXPECT_NEAR(v, 0.32, 1e-9);
}

TEST(Repeat, StepDescendsUntilTarget) {
  DrillPath path;
  DamperParams d;
  DrillPlan p = initial_plan(path, d);
  std::vector<double> t(32, 0.0);
  t[4] = 1.0;
  const DrillPlan q = repeat_step(p, t, d);
  EXPECT_EQ(q.knots[4].z_command, p.knots[4].z_command + d.v_slow);
  EXPECT_EQ(q.knots[5].z_command, p.knots[5].z_command);
  EXPECT_THROW(repeat_step(p, {1.0}, d), Error);
}

TEST(Spline, InterpolatesKnotsExactly) {
  std::mt19937_64 gen(1);
  DrillPath path;
  for (int trial = 0; trial < 100; ++trial) {
    const auto knots = random_knots(gen, 32, trial % 2 == 1);
    const ClosedTrajectory s = build_spline(path, knots);
    for (const auto& k : knots) ASSERT_NEAR(s.z_at(k.angle), k.z_command, 1e-9);
  }
}

TEST(Spline, NoOvershootBetweenKnots) {
  std::mt19937_64 gen(2);
  DrillPath path;
  for (int trial = 0; trial < 100; ++trial) {
    const auto knots = random_knots(gen, 32, trial % 2 == 1);
    const ClosedTrajectory s = build_spline(path, knots);
    const std::size_t n = knots.size();
    for (std::size_t k = 0; k < n; ++k) {
      const auto& a = knots[k];
      const auto& b = knots[(k + 1) % n];
      const double end = k + 1 < n ? b.angle : b.angle + kTwoPi;
      const double lo = std::min(a.z_command, b.z_command) - 1e-12;
      const double hi = std::max(a.z_command, b.z_command) + 1e-12;
      for (int i = 0; i <= 1000; ++i) {
        const double th = a.angle + (end - a.angle) * i / 1000.0;
        const double z = s.z_at(th);
        ASSERT_GE(z, lo) << trial << " seg " << k;
        ASSERT_LE(z, hi) << trial << " seg " << k;
      }
    }
  }
}

TEST(Spline, PeriodicAtTheSeam) {
  std::mt19937_64 gen(3);
  DrillPath path;
  for (int trial = 0; trial < 100; ++trial) {
    const auto knots = random_knots(gen, 32, true);
    const ClosedTrajectory s = build_spline(path, knots);
    const double seam = knots.front().angle;
    const double eps = 1e-12;
    EXPECT_NEAR(s.z_at(seam - eps), s.z_at(seam), 1e-9);
    EXPECT_NEAR(s.z_at(seam), s.z_at(seam + kTwoPi), 1e-9);
    EXPECT_NEAR(s.dz_at(seam - eps), s.dz_at(seam + eps), 1e-6);
    // Slope continuity at every knot, seam included.
    for (const auto& k : knots) EXPECT_NEAR(s.dz_at(k.angle - 1e-10), s.dz_at(k.angle + 1e-10), 1e-5);
  }
}

TEST(Spline, FlatAtLocalExtrema) {
  DrillPath path;
  std::vector<SamplePointPlan> k;
  for (int i = 0; i < 8; ++i) k.push_back({i, kTwoPi * i / 8, i == 3 ? 0.3 : 0.1, 0.0});
  const ClosedTrajectory s = build_spline(path, k);
  EXPECT_EQ(s.slopes()[3], 0.0);
  EXPECT_EQ(s.slopes()[0], 0.0);  // flat neighbourhood
}

TEST(Spline, RejectsBadKnots) {
  DrillPath path;
  std::vector<SamplePointPlan> k{{0, 0.0, 0.1, 0.0}};
  EXPECT_THROW(build_spline(path, k), Error);
  k = {{0, 1.0, 0.1, 0.0}, {1, 0.5, 0.1, 0.0}};
  EXPECT_THROW(build_spline(path, k), Error);
  k = {{0, 0.0, 0.1, 0.0}, {1, kTwoPi, 0.1, 0.0}};
  EXPECT_THROW(build_spline(path, k), Error);
}

TEST(Spline, CsvSamplesThePath) {
  DrillPath path;
  DamperParams d;
  const DrillPlan p = initial_plan(path, d);
  std::ostringstream os;
  build_spline(path, p.knots).write_csv(os, 4);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "theta,x,y,z");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, 4);
}
