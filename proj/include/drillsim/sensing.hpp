#pragma once

// Synthetic sensors: the stereo depth camera (RGB-D at 20 Hz), the overview
// completion observer and the 128 SPS force sensor, all driven by one tick
// clock.

#include <cstdint>
#include <random>
#include <vector>

#include "drillsim/color.hpp"
#include "drillsim/image.hpp"
#include "drillsim/kernels.hpp"
#include "drillsim/specimen.hpp"

namespace drillsim {

struct Palette {
  Hsv flap{30.0, 0.60, 0.85};
  Hsv groove{0.0, 0.05, 0.35};
  Hsv body{210.0, 0.60, 0.80};
  double hue_jitter_deg = 4.0;
  double value_jitter = 0.03;
};

struct CameraModel {
  int width = 960;
  int height = 540;
  double mm_per_px = 0.04;
  double depth_noise_sigma = 0.02;  // repeatability, mm
  double depth_bias = 0.10;         // accuracy offset, constant per trial, mm
  double groove_half_width = 0.25;  // drill-bit radius, mm
  Palette palette;

  // Throws a config error if the drill path (plus groove) does not fit.
  void validate(const DrillPath& path) const;
  PixelRect full_frame() const { return {0, 0, width, height}; }
  kernels::PixelMapping mapping() const { return {mm_per_px, width, height}; }
  // Pixel coordinates (continuous) of a world point.
  Vec2 world_to_pixel(Vec2 q) const;
  // Smallest pixel rectangle covering the path and its groove.
  PixelRect path_bounds(const DrillPath& path) const;
};

struct RgbdFrame {
  RgbImage rgb;
  DepthMap depth;
};

RgbdFrame render_rgbd(const SpecimenTruth& spec, const CameraModel& cam, std::uint64_t noise_seed);
// Renders only `window`; pixel values equal the same pixels of a full render.
RgbdFrame render_rgbd(const SpecimenTruth& spec, const CameraModel& cam, std::uint64_t noise_seed,
                      PixelRect window);

// The two halves of render_rgbd. Depth noise is per frame; the colour jitter
// is shell texture, so callers may hold its seed fixed over a trial.
DepthMap render_depth_map(const SpecimenTruth& spec, const CameraModel& cam, std::uint64_t noise_seed,
                          PixelRect window);
RgbImage render_rgb_image(const SpecimenTruth& spec, const CameraModel& cam, std::uint64_t texture_seed,
                          PixelRect window);

// Renderer ground truth: Inner = flap interior, Outer = body, Ignore = groove.
RegionLabels render_truth_regions(const SpecimenTruth& spec, const CameraModel& cam, PixelRect window);

struct ObserverParams {
  double sigma = 0.05;
  double bias = 0.0;
};

struct CompletionObservation {
  std::vector<double> levels;
  double average = 0.0;
  double timestamp = 0.0;
};

CompletionObservation observe_completion(const SpecimenTruth& spec, const ObserverParams& observer,
                                         std::uint64_t seed);

struct ForceSample {
  double f_z = 0.0;  // compressive force positive, N
  double timestamp = 0.0;
};

class ForceSensor {
 public:
  ForceSensor(double sigma, std::uint64_t seed);

  ForceSample sample(double plant_force, double timestamp);
  double sigma() const { return sigma_; }

 private:
  double sigma_;
  std::mt19937_64 gen_;
  std::normal_distribution<double> noise_{0.0, 1.0};
};

// Integer tick clock shared by every stream: 640 ticks per second, so the
// 128 SPS force period (5 ticks) and the 20 Hz frame period (32 ticks) are
// both exact. At equal timestamps the force sample precedes the frame.
class SimClock {
 public:
  static constexpr std::int64_t kTicksPerSecond = 640;
  static constexpr std::int64_t kForcePeriod = 5;
  static constexpr std::int64_t kFramePeriod = 32;

  std::int64_t ticks() const { return ticks_; }
  double now() const { return seconds(ticks_); }
  void advance(std::int64_t ticks) { ticks_ += ticks; }
  void advance_to(std::int64_t tick) { ticks_ = tick; }

  static double seconds(std::int64_t ticks) {
    return static_cast<double>(ticks) / static_cast<double>(kTicksPerSecond);
  }
  static std::int64_t to_ticks(double seconds);
  static bool is_force_tick(std::int64_t t) { return t % kForcePeriod == 0; }
  static bool is_frame_tick(std::int64_t t) { return t % kFramePeriod == 0; }

 private:
  std::int64_t ticks_ = 0;
};

}  // namespace drillsim
