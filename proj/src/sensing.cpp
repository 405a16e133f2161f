#include "drillsim/sensing.hpp"

#include <algorithm>
#include <cmath>

#include "drillsim/error.hpp"
#include "drillsim/rng.hpp"

namespace drillsim {

Vec2 CameraModel::world_to_pixel(Vec2 q) const {
  return {q.x / mm_per_px - 0.5 + 0.5 * width, q.y / mm_per_px - 0.5 + 0.5 * height};
}

PixelRect CameraModel::path_bounds(const DrillPath& path) const {
  const Vec2 c = world_to_pixel(path.center);
  const double r = (path.radius + groove_half_width) / mm_per_px;
  const int x0 = static_cast<int>(std::floor(c.x - r));
  const int y0 = static_cast<int>(std::floor(c.y - r));
  const int x1 = static_cast<int>(std::ceil(c.x + r)) + 1;
  const int y1 = static_cast<int>(std::ceil(c.y + r)) + 1;
  return {x0, y0, x1 - x0, y1 - y0};
}

void CameraModel::validate(const DrillPath& path) const {
  if (width <= 0 || height <= 0 || !(mm_per_px > 0.0)) {
    throw Error(ErrorKind::Config, "sensing/camera", "camera dimensions and scale must be positive");
  }
  if (depth_noise_sigma < 0.0 || groove_half_width <= 0.0) {
    throw Error(ErrorKind::Config, "sensing/camera", "noise must be >= 0 and groove width > 0");
  }
  if (!full_frame().contains(path_bounds(path))) {
    throw Error(ErrorKind::Config, "sensing/camera", "camera field of view is smaller than the drill path");
  }
}

namespace {

std::vector<double> groove_depths(const SpecimenTruth& spec) {
  std::vector<double> d;
  d.reserve(spec.points.size());
  for (const auto& p : spec.points) d.push_back(p.drilled_depth);
  return d;
}

kernels::PathShape shape_of(const SpecimenTruth& spec, const CameraModel& cam) {
  return {spec.path.center, spec.path.radius, cam.groove_half_width};
}

}  // namespace

RgbdFrame render_rgbd(const SpecimenTruth& spec, const CameraModel& cam, std::uint64_t noise_seed) {
  return render_rgbd(spec, cam, noise_seed, cam.full_frame());
}

namespace {

void check_window(const SpecimenTruth& spec, const CameraModel& cam, PixelRect window) {
  cam.validate(spec.path);
  if (!cam.full_frame().contains(window)) {
    throw Error(ErrorKind::Config, "sensing/render", "render window outside the sensor");
  }
}

}  // namespace

DepthMap render_depth_map(const SpecimenTruth& spec, const CameraModel& cam, std::uint64_t noise_seed,
                          PixelRect window) {
  check_window(spec, cam, window);
  const auto depths = groove_depths(spec);
  kernels::DepthScene ds;
  ds.mapping = cam.mapping();
  ds.shape = shape_of(spec, cam);
  ds.surface_depth = spec.surface_base_depth;
  ds.bias = cam.depth_bias;
  ds.flap_displacement = spec.flap_displacement;
  ds.flap_tilt = spec.flap_tilt;
  ds.groove_depths = depths;
  ds.noise_sigma = cam.depth_noise_sigma;
  ds.noise_key = rng::derive(noise_seed, rng::kDepthNoise);
  DepthMap out;
  kernels::render_depth(ds, window, out.mm);
  out.window = window;
  return out;
}

RgbImage render_rgb_image(const SpecimenTruth& spec, const CameraModel& cam, std::uint64_t texture_seed,
                          PixelRect window) {
  check_window(spec, cam, window);
  kernels::RgbScene rs;
  rs.mapping = cam.mapping();
  rs.shape = shape_of(spec, cam);
  rs.flap = cam.palette.flap;
  rs.groove = cam.palette.groove;
  rs.body = cam.palette.body;
  rs.hue_jitter_deg = cam.palette.hue_jitter_deg;
  rs.value_jitter = cam.palette.value_jitter;
  rs.jitter_key = rng::derive(texture_seed, rng::kHueJitter);
  RgbImage out;
  kernels::render_rgb(rs, window, out.pixels);
  out.window = window;
  return out;
}

RgbdFrame render_rgbd(const SpecimenTruth& spec, const CameraModel& cam, std::uint64_t noise_seed,
                      PixelRect window) {
  return {render_rgb_image(spec, cam, noise_seed, window), render_depth_map(spec, cam, noise_seed, window)};
}

RegionLabels render_truth_regions(const SpecimenTruth& spec, const CameraModel& cam, PixelRect window) {
  RegionLabels labels(window.width, window.height);
  const auto mapping = cam.mapping();
  const auto shape = shape_of(spec, cam);
  for (int y = 0; y < window.height; ++y) {
    for (int x = 0; x < window.width; ++x) {
      switch (shape.classify(mapping.world_at(window.x + x, window.y + y))) {
        case kernels::SurfaceClass::Flap: labels(x, y) = Region::Inner; break;
        case kernels::SurfaceClass::Body: labels(x, y) = Region::Outer; break;
        case kernels::SurfaceClass::Groove: labels(x, y) = Region::Ignore; break;
      }
    }
  }
  return labels;
}

CompletionObservation observe_completion(const SpecimenTruth& spec, const ObserverParams& observer,
                                         std::uint64_t seed) {
  std::mt19937_64 gen(rng::derive(seed, rng::kObserver));
  std::normal_distribution<double> noise(0.0, 1.0);
  CompletionObservation obs;
  obs.levels.reserve(spec.points.size());
  double sum = 0.0;
  for (const auto& p : spec.points) {
    double level = p.completion() + observer.bias;
    if (observer.sigma > 0.0) level += observer.sigma * noise(gen);
    level = std::clamp(level, 0.0, 1.0);
    obs.levels.push_back(level);
    sum += level;
  }
  obs.average = obs.levels.empty() ? 0.0 : sum / static_cast<double>(obs.levels.size());
  return obs;
}

ForceSensor::ForceSensor(double sigma, std::uint64_t seed)
    : sigma_(sigma), gen_(rng::derive(seed, rng::kForce)) {}

ForceSample ForceSensor::sample(double plant_force, double timestamp) {
  const double noise = sigma_ > 0.0 ? sigma_ * noise_(gen_) : 0.0;
  return {plant_force + noise, timestamp};
}

std::int64_t SimClock::to_ticks(double seconds) {
  return static_cast<std::int64_t>(std::llround(seconds * static_cast<double>(kTicksPerSecond)));
}

}  // namespace drillsim
