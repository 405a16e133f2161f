#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "drillsim/error.hpp"
#include "drillsim/rng.hpp"
#include "drillsim/sensing.hpp"
#include "test_support.hpp"

using namespace drillsim;
using drillsim::testing::drilled_specimen;

TEST(Clock, StreamsShareExactTicks) {
  EXPECT_EQ(SimClock::to_ticks(0.05), SimClock::kFramePeriod);
  EXPECT_EQ(SimClock::to_ticks(1.0 / 128.0), SimClock::kForcePeriod);
  EXPECT_EQ(SimClock::to_ticks(60.0), 38400);
  EXPECT_TRUE(SimClock::is_force_tick(160));
  EXPECT_TRUE(SimClock::is_frame_tick(160));
  EXPECT_FALSE(SimClock::is_frame_tick(165));
  SimClock c;
  c.advance(320);
  EXPECT_DOUBLE_EQ(c.now(), 0.5);
}

TEST(Rng, NormalTableIsSymmetricAndSorted) {
  const auto& t = rng::normal_table();
  EXPECT_TRUE(std::is_sorted(t.begin(), t.end()));
  for (std::size_t i = 0; i < t.size() / 2; ++i) ASSERT_EQ(t[i], -t[t.size() - 1 - i]);
  double sum = 0, sq = 0;
  for (float v : t) {
    sum += v;
    sq += static_cast<double>(v) * v;
  }
  EXPECT_NEAR(sum / t.size(), 0.0, 1e-9);
  EXPECT_NEAR(std::sqrt(sq / t.size()), 1.0, 2e-3);
}

TEST(Rng, CounterDrawsAreOrderFree) {
  EXPECT_EQ(rng::normal_at(11, 5), rng::normal_at(11, 5));
  EXPECT_NE(rng::normal_at(11, 5), rng::normal_at(11, 6));
  EXPECT_NE(rng::derive(1, 2, 3), rng::derive(1, 3, 2));
}

TEST(Camera, PixelMappingRoundTrip) {
  CameraModel cam;
  const auto m = cam.mapping();
  for (int px : {0, 17, 480, 959}) {
    for (int py : {0, 270, 539}) {
      const Vec2 p = cam.world_to_pixel(m.world_at(px, py));
      EXPECT_NEAR(p.x, px, 1e-9);
      EXPECT_NEAR(p.y, py, 1e-9);
    }
  }
}

TEST(Camera, PathMustFit) {
  CameraModel cam;
  DrillPath path;
  path.radius = 12.0;  // 24 mm across on a 21.6 mm tall sensor
  EXPECT_THROW(cam.validate(path), Error);
  path.radius = 4.0;
  EXPECT_NO_THROW(cam.validate(path));
  const PixelRect b = cam.path_bounds(path);
  EXPECT_TRUE(cam.full_frame().contains(b));
  EXPECT_GE(b.width, static_cast<int>(2 * (4.0 + cam.groove_half_width) / cam.mm_per_px));
}

TEST(Render, WindowMatchesFullFrame) {
  CameraModel cam;
  const SpecimenTruth spec = drilled_specimen(3, 0.6);
  const RgbdFrame full = render_rgbd(spec, cam, 99);
  const PixelRect win{300, 100, 64, 48};
  const RgbdFrame part = render_rgbd(spec, cam, 99, win);
  ASSERT_EQ(part.depth.mm.width(), 64);
  for (int y = 0; y < win.height; ++y) {
    for (int x = 0; x < win.width; ++x) {
      ASSERT_EQ(part.depth.mm(x, y), full.depth.mm(win.x + x, win.y + y));
      ASSERT_EQ(part.rgb.pixels(x, y), full.rgb.pixels(win.x + x, win.y + y));
    }
  }
}

TEST(Render, SeededAndWindowChecked) {
  CameraModel cam;
  const SpecimenTruth spec = drilled_specimen(3, 0.6);
  const PixelRect win{400, 200, 40, 40};
  EXPECT_EQ(render_rgbd(spec, cam, 5, win).depth.mm, render_rgbd(spec, cam, 5, win).depth.mm);
  EXPECT_NE(render_rgbd(spec, cam, 5, win).depth.mm, render_rgbd(spec, cam, 6, win).depth.mm);
  EXPECT_THROW(render_rgbd(spec, cam, 5, {950, 0, 20, 20}), Error);
}

TEST(Render, DepthNoiseStatistics) {
  CameraModel cam;
  const SpecimenTruth spec = drilled_specimen(3, 0.0);
  // A body patch well outside the path.
  const PixelRect win{20, 20, 200, 100};
  const DepthMap d = render_depth_map(spec, cam, 1234, win);
  const auto v = d.mm.data();
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double sq = 0;
  for (double x : v) sq += (x - mean) * (x - mean);
  const double sd = std::sqrt(sq / static_cast<double>(v.size()));
  EXPECT_NEAR(mean, spec.surface_base_depth + cam.depth_bias, 5e-4);
  EXPECT_NEAR(sd, cam.depth_noise_sigma, 0.02 * cam.depth_noise_sigma);
}

TEST(Render, NoiselessDepthFollowsGeometry) {
  CameraModel cam;
  cam.depth_noise_sigma = 0.0;
  cam.depth_bias = 0.0;
  SpecimenTruth spec = drilled_specimen(3, 1.0);
  spec.flap_displacement = 0.2;
  const auto m = cam.mapping();
  const RgbdFrame f = render_rgbd(spec, cam, 1);
  const Vec2 centre_px = cam.world_to_pixel(spec.path.center);
  const int cx = static_cast<int>(centre_px.x);
  const int cy = static_cast<int>(centre_px.y);
  EXPECT_NEAR(f.depth.mm(cx, cy), spec.surface_base_depth + 0.2, 1e-12);
  EXPECT_EQ(f.depth.mm(5, 5), spec.surface_base_depth);
  (void)m;
}

TEST(Render, TruthRegionsPartitionCrop) {
  CameraModel cam;
  const SpecimenTruth spec = drilled_specimen(3, 0.5);
  const PixelRect win = cam.path_bounds(spec.path);
  const RegionLabels t = render_truth_regions(spec, cam, win);
  std::int64_t inner = 0, outer = 0, ignore = 0;
  for (Region r : t.data()) {
    inner += r == Region::Inner;
    outer += r == Region::Outer;
    ignore += r == Region::Ignore;
  }
  EXPECT_EQ(inner + outer + ignore, static_cast<std::int64_t>(t.size()));
  const double px_area = cam.mm_per_px * cam.mm_per_px;
  EXPECT_NEAR(inner * px_area, kPi * 3.75 * 3.75, 0.5);
  EXPECT_NEAR(ignore * px_area, kPi * (4.25 * 4.25 - 3.75 * 3.75), 0.5);
}

TEST(Observer, NoiselessObserverIsTruth) {
  SpecimenTruth spec = drilled_specimen(4, 0.75);
  const CompletionObservation o = observe_completion(spec, {0.0, 0.0}, 1);
  for (std::size_t k = 0; k < o.levels.size(); ++k) EXPECT_DOUBLE_EQ(o.levels[k], spec.points[k].completion());
  EXPECT_NEAR(o.average, 0.75, 1e-12);
}

TEST(Observer, BiasShiftsAndClamps) {
  SpecimenTruth spec = drilled_specimen(4, 0.75);
  EXPECT_NEAR(observe_completion(spec, {0.0, 0.10}, 1).average, 0.85, 1e-12);
  spec = drilled_specimen(4, 1.0);
  EXPECT_LE(observe_completion(spec, {0.2, 0.0}, 1).average, 1.0);
  const auto a = observe_completion(spec, {0.05, 0.0}, 9);
  const auto b = observe_completion(spec, {0.05, 0.0}, 9);
  EXPECT_EQ(a.levels, b.levels);
}

TEST(ForceSensorTest, NoiseIsSeeded) {
  ForceSensor a(0.01, 3), b(0.01, 3), quiet(0.0, 3);
  for (int i = 0; i < 10; ++i) {
    EXPECT_EQ(a.sample(0.2, i).f_z, b.sample(0.2, i).f_z);
    EXPECT_EQ(quiet.sample(0.2, i).f_z, 0.2);
  }
}
