#include <gtest/gtest.h>

#include <cmath>

#include "drillsim/detector.hpp"
#include "drillsim/error.hpp"
#include "drillsim/sensing.hpp"
#include "test_support.hpp"

using namespace drillsim;
using namespace drillsim::testing;

namespace {

// Uniform residual maps: inner pixels at `inner`, outer at `outer`.
DetachabilityReading classify_uniform(double inner, double outer) {
  Grid<double> r(40, 20);
  RegionLabels l(40, 20);
  for (int y = 0; y < 20; ++y) {
    for (int x = 0; x < 40; ++x) {
      const bool left = x < 20;
      l(x, y) = left ? Region::Inner : Region::Outer;
      r(x, y) = left ? inner : outer;
    }
  }
  return classify(r, l, 0.12);
}

DetachabilityReading detect_pair(const Scene& s, const SpecimenTruth& now, std::uint64_t seed) {
  const RgbdFrame ref = render_rgbd(s.spec, s.cam, seed, s.cfg.crop);
  const RgbdFrame cur = render_rgbd(now, s.cam, seed + 1000, s.cfg.crop);
  const InitialReference r = capture_initial(ref.depth, s.cfg.crop);
  return detect(cur.rgb, cur.depth, r, s.cfg);
}

}  // namespace

TEST(Classifier, StrictThreshold) {
  EXPECT_EQ(classify_delta(0.15, 0.12), FlapState::Detachable);
  EXPECT_EQ(classify_delta(0.12, 0.12), FlapState::NonDetachable);
  EXPECT_EQ(classify_delta(0.05, 0.12), FlapState::NonDetachable);
  EXPECT_EQ(classify_delta(-0.15, 0.12), FlapState::Detachable);
}

TEST(Classifier, RegionMeansHitTheBoundaryExactly) {
  EXPECT_EQ(classify_uniform(0.12, 0.0).delta, 0.12);
  EXPECT_EQ(classify_uniform(0.12, 0.0).state, FlapState::NonDetachable);
  EXPECT_EQ(classify_uniform(0.15, 0.0).state, FlapState::Detachable);
  EXPECT_EQ(classify_uniform(0.05, 0.0).state, FlapState::NonDetachable);
  EXPECT_EQ(classify_uniform(0.0, 0.0).state, FlapState::NonDetachable);
}

TEST(Classifier, EmptyRegionIsAnError) {
  Grid<double> r(4, 4, 0.0);
  RegionLabels l(4, 4, Region::Inner);
  EXPECT_THROW(classify(r, l, 0.12), Error);
  RegionLabels small(3, 3, Region::Inner);
  EXPECT_THROW(classify(r, small, 0.12), Error);
}

TEST(Crop, DefaultCropCoversPath) {
  CameraModel cam;
  DrillPath path;
  const CropRect c = default_crop(cam, path);
  EXPECT_EQ(c.width, 240);
  EXPECT_EQ(c.height, 240);
  EXPECT_TRUE(c.contains(cam.path_bounds(path)));
  EXPECT_THROW(default_crop(cam, path, 150), Error);
}

TEST(Crop, SubtractAcceptsLargerWindow) {
  const Scene s = default_scene(1);
  const RgbdFrame full = render_rgbd(s.spec, s.cam, 3);
  const RgbdFrame crop = render_rgbd(s.spec, s.cam, 3, s.cfg.crop);
  const InitialReference ref = capture_initial(crop.depth, s.cfg.crop);
  const ResidualMap r = subtract(crop.depth, ref);
  EXPECT_EQ(subtract(full.depth, ref), r);
  for (double v : r.data()) ASSERT_EQ(v, 0.0);
}

TEST(Crop, RecaptureReplacesReference) {
  const Scene s = default_scene(1);
  InitialReference ref = capture_initial(render_rgbd(s.spec, s.cam, 3, s.cfg.crop).depth, s.cfg.crop);
  const RgbdFrame later = render_rgbd(displaced(s.spec, 0.2), s.cam, 4, s.cfg.crop);
  recapture(ref, later.depth);
  EXPECT_EQ(ref.captures, 2);
  const ResidualMap r = subtract(later.depth, ref);
  for (double v : r.data()) ASSERT_EQ(v, 0.0);
}

TEST(Segmentation, AgreesWithRendererTruth) {
  const Scene s = default_scene(5, 0.6);
  const RgbImage rgb = render_rgb_image(s.spec, s.cam, 77, s.cfg.crop);
  const RegionLabels got = segment(rgb, s.cfg.hsv);
  const RegionLabels truth = render_truth_regions(s.spec, s.cam, s.cfg.crop);
  std::int64_t agree = 0;
  for (std::size_t i = 0; i < got.size(); ++i) agree += got.data()[i] == truth.data()[i];
  EXPECT_GE(static_cast<double>(agree) / static_cast<double>(got.size()), 0.99);
}

TEST(Segmentation, SeedsAreContained) {
  const Scene s = default_scene(6, 0.3);
  const RgbImage rgb = render_rgb_image(s.spec, s.cam, 8, s.cfg.crop);
  const SeedSets seeds = seed_sets(rgb, s.cfg.hsv);
  const RegionLabels labels = segment(rgb, s.cfg.hsv);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int n = seeds.inner.data()[i] + seeds.outer.data()[i] + seeds.groove.data()[i];
    if (n != 1) continue;
    if (seeds.inner.data()[i]) {
      ASSERT_EQ(labels.data()[i], Region::Inner);
    }
    if (seeds.outer.data()[i]) {
      ASSERT_EQ(labels.data()[i], Region::Outer);
    }
    if (seeds.groove.data()[i]) {
      ASSERT_EQ(labels.data()[i], Region::Ignore);
    }
  }
}

TEST(Segmentation, MissingSeedsAreAnError) {
  Scene s = default_scene(6);
  s.cam.palette.body = s.cam.palette.flap;  // no blue body anywhere
  const RgbImage rgb = render_rgb_image(s.spec, s.cam, 8, s.cfg.crop);
  try {
    segment(rgb, s.cfg.hsv);
    FAIL() << "expected a segmentation error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Segmentation);
  }
}

TEST(RingMask, ClearsBandAroundPath) {
  const Scene s = default_scene(1);
  RegionLabels l(s.cfg.crop.width, s.cfg.crop.height, Region::Inner);
  apply_ring_mask(l, s.cfg);
  for (int y = 0; y < l.height(); ++y) {
    for (int x = 0; x < l.width(); ++x) {
      const Vec2 q = s.cfg.mapping.world_at(s.cfg.crop.x + x, s.cfg.crop.y + y);
      const double off = std::fabs(norm(q - s.spec.path.center) - s.spec.path.radius);
      ASSERT_EQ(l(x, y) == Region::Ignore, off <= 0.5 * s.cfg.ring_width);
    }
  }
}

TEST(Detect, PressedFreeFlapIsDetachable) {
  const Scene s = default_scene(9);
  const DetachabilityReading r = detect_pair(s, displaced(s.spec, 0.20), 1);
  EXPECT_NEAR(r.delta, 0.20, 0.01);
  EXPECT_EQ(r.state, FlapState::Detachable);
  EXPECT_GE(r.inner_pixels, 10000);
  EXPECT_GE(r.outer_pixels, 10000);
}

TEST(Detect, RestingFlapIsNonDetachable) {
  const Scene s = default_scene(9);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const DetachabilityReading r = detect_pair(s, s.spec, seed);
    EXPECT_LT(std::fabs(r.delta), 0.01);
    EXPECT_EQ(r.state, FlapState::NonDetachable);
  }
}

TEST(Detect, PipelineSplitMatchesDetect) {
  const Scene s = default_scene(9);
  const RgbdFrame ref = render_rgbd(s.spec, s.cam, 1, s.cfg.crop);
  const RgbdFrame cur = render_rgbd(displaced(s.spec, 0.1), s.cam, 2, s.cfg.crop);
  const InitialReference r = capture_initial(ref.depth, s.cfg.crop);
  const DetachabilityReading a = detect(cur.rgb, cur.depth, r, s.cfg);
  const DetachabilityReading b = measure(cur.depth, segment_crop(cur.rgb, s.cfg), r, s.cfg);
  EXPECT_EQ(a.delta, b.delta);
  EXPECT_EQ(a.inner_pixels, b.inner_pixels);
}

TEST(Detect, ReferenceCropMustMatch) {
  const Scene s = default_scene(9);
  const RgbdFrame f = render_rgbd(s.spec, s.cam, 1, s.cfg.crop);
  PixelRect other = s.cfg.crop;
  other.x += 1;
  const InitialReference r = capture_initial(render_rgbd(s.spec, s.cam, 1, other).depth, other);
  EXPECT_THROW(detect(f.rgb, f.depth, r, s.cfg), Error);
}
