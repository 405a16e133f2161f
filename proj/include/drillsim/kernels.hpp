#pragma once

// Data-parallel per-pixel kernels. Each kernel has an OpenMP version in
// drillsim::kernels and a plain serial version in drillsim::kernels::ref that
// the tests compare against. Random draws are counter-based per sensor pixel
// and reductions go through fixed per-row partials, so both versions produce
// bit-identical output regardless of thread count.

#include <algorithm>
#include <cstdint>
#include <span>

#include "drillsim/color.hpp"
#include "drillsim/geometry.hpp"
#include "drillsim/image.hpp"

namespace drillsim::kernels {

// World/pixel mapping shared by the renderers: the world origin sits at the
// sensor centre, +x to the right, +y down, mm_per_px isotropic.
struct PixelMapping {
  double mm_per_px = 0.04;
  int sensor_width = 960;
  int sensor_height = 540;

  Vec2 world_at(int px, int py) const {
    return {(px + 0.5 - 0.5 * sensor_width) * mm_per_px,
            (py + 0.5 - 0.5 * sensor_height) * mm_per_px};
  }
};

enum class SurfaceClass : std::uint8_t { Flap, Groove, Body };

struct PathShape {
  Vec2 center;
  double radius = 4.0;
  double groove_half_width = 0.25;

  SurfaceClass classify(Vec2 q) const {
    const Vec2 d = q - center;
    const double d2 = d.x * d.x + d.y * d.y;
    const double lo = std::max(radius - groove_half_width, 0.0);
    const double hi = radius + groove_half_width;
    if (d2 < lo * lo) return SurfaceClass::Flap;
    if (d2 <= hi * hi) return SurfaceClass::Groove;
    return SurfaceClass::Body;
  }
};

struct DepthScene {
  PixelMapping mapping;
  PathShape shape;
  double surface_depth = 500.0;
  double bias = 0.0;
  double flap_displacement = 0.0;
  Vec2 flap_tilt;
  std::span<const double> groove_depths;  // drilled depth at each path sample
  double noise_sigma = 0.0;
  std::uint64_t noise_key = 0;
};

struct RgbScene {
  PixelMapping mapping;
  PathShape shape;
  Hsv flap;
  Hsv groove;
  Hsv body;
  double hue_jitter_deg = 0.0;
  double value_jitter = 0.0;
  std::uint64_t jitter_key = 0;
};

// Per-pixel HSV window membership bits.
enum MatchBits : std::uint8_t { kMatchInner = 1, kMatchOuter = 2, kMatchGroove = 4 };

struct HsvWindows {
  HsvWindow inner;
  HsvWindow outer;
  HsvWindow groove;
};

struct RegionSums {
  double mean_inner = 0.0;
  double mean_outer = 0.0;
  std::int64_t count_inner = 0;
  std::int64_t count_outer = 0;
};

double groove_depth_at(std::span<const double> depths, double angle);

void render_depth(const DepthScene& scene, PixelRect window, Grid<double>& out);
void render_rgb(const RgbScene& scene, PixelRect window, Grid<Rgb>& out);
void subtract(const Grid<double>& current, const Grid<double>& initial, Grid<double>& out);
RegionSums region_means(const Grid<double>& residual, const Grid<Region>& labels);
void match_hsv(const Grid<Rgb>& rgb, const HsvWindows& windows, Grid<std::uint8_t>& out);
void gradient_magnitude(const Grid<Rgb>& rgb, Grid<float>& out);
// Square structuring element of half-size `radius`; pixels outside the image
// count as background.
void erode(const Grid<std::uint8_t>& mask, int radius, Grid<std::uint8_t>& out);

namespace ref {
void render_depth(const DepthScene& scene, PixelRect window, Grid<double>& out);
void render_rgb(const RgbScene& scene, PixelRect window, Grid<Rgb>& out);
void subtract(const Grid<double>& current, const Grid<double>& initial, Grid<double>& out);
RegionSums region_means(const Grid<double>& residual, const Grid<Region>& labels);
void match_hsv(const Grid<Rgb>& rgb, const HsvWindows& windows, Grid<std::uint8_t>& out);
void gradient_magnitude(const Grid<Rgb>& rgb, Grid<float>& out);
void erode(const Grid<std::uint8_t>& mask, int radius, Grid<std::uint8_t>& out);
}  // namespace ref

}  // namespace drillsim::kernels
