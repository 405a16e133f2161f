#include "drillsim/detector.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "drillsim/error.hpp"
#include "drillsim/watershed.hpp"

namespace drillsim {

CropRect default_crop(const CameraModel& cam, const DrillPath& path, int size) {
  const PixelRect full = cam.full_frame();
  if (size <= 0 || size > full.width || size > full.height) {
    throw Error(ErrorKind::Config, "detector/crop", fmt::format("crop size {} does not fit the sensor", size));
  }
  const Vec2 c = cam.world_to_pixel(path.center);
  int x0 = static_cast<int>(std::lround(c.x + 0.5 - 0.5 * size));
  int y0 = static_cast<int>(std::lround(c.y + 0.5 - 0.5 * size));
  x0 = std::clamp(x0, 0, full.width - size);
  y0 = std::clamp(y0, 0, full.height - size);
  const CropRect crop{x0, y0, size, size};
  if (!crop.contains(cam.path_bounds(path))) {
    throw Error(ErrorKind::Config, "detector/crop",
                fmt::format("crop of {} px does not contain the drill path", size));
  }
  return crop;
}

namespace {

template <class T>
Grid<T> crop_grid(const Grid<T>& src, PixelRect window, CropRect crop, const char* stage) {
  if (!window.contains(crop)) {
    throw Error(ErrorKind::Config, stage,
                fmt::format("crop {}x{}+{}+{} outside the frame", crop.width, crop.height, crop.x, crop.y));
  }
  if (window == crop) return src;
  Grid<T> out(crop.width, crop.height);
  for (int y = 0; y < crop.height; ++y) {
    const auto in = src.row(crop.y - window.y + y);
    std::copy_n(in.begin() + (crop.x - window.x), crop.width, out.row(y).begin());
  }
  return out;
}

}  // namespace

DepthMap crop_depth(const DepthMap& depth, CropRect crop) {
  return {crop_grid(depth.mm, depth.window, crop, "detector/crop"), crop, depth.timestamp};
}

RgbImage crop_rgb(const RgbImage& rgb, CropRect crop) {
  return {crop_grid(rgb.pixels, rgb.window, crop, "detector/crop"), crop, rgb.timestamp};
}

InitialReference capture_initial(const DepthMap& depth, CropRect crop) {
  if (crop.width <= 0 || crop.height <= 0) {
    throw Error(ErrorKind::Config, "detector/capture", "crop must have positive size");
  }
  InitialReference ref;
  ref.depth = crop_depth(depth, crop);
  ref.crop = crop;
  ref.captures = 1;
  return ref;
}

void recapture(InitialReference& ref, const DepthMap& depth) {
  ref.depth = crop_depth(depth, ref.crop);
  ++ref.captures;
  spdlog::info("detector: initial reference re-captured at t={:.4f}s (capture #{})", depth.timestamp,
               ref.captures);
}

ResidualMap subtract(const DepthMap& current, const InitialReference& ref) {
  const Grid<double>* cur = &current.mm;
  Grid<double> cropped;
  if (!(current.window == ref.crop)) {
    if (!current.window.contains(ref.crop)) {
      throw Error(ErrorKind::Pipeline, "detector/subtract",
                  fmt::format("frame {}x{} does not cover the {}x{} reference", current.mm.width(),
                              current.mm.height(), ref.crop.width, ref.crop.height));
    }
    cropped = crop_grid(current.mm, current.window, ref.crop, "detector/subtract");
    cur = &cropped;
  }
  if (cur->width() != ref.depth.mm.width() || cur->height() != ref.depth.mm.height()) {
    throw Error(ErrorKind::Pipeline, "detector/subtract", "dimension mismatch against the reference");
  }
  ResidualMap out;
  kernels::subtract(*cur, ref.depth.mm, out);
  return out;
}

SeedSets seed_sets(const RgbImage& rgb, const HsvConfig& cfg) {
  Grid<std::uint8_t> bits;
  kernels::match_hsv(rgb.pixels, {cfg.inner, cfg.outer, cfg.groove}, bits);
  const int w = bits.width();
  const int h = bits.height();
  Grid<std::uint8_t> inner(w, h), outer(w, h), groove(w, h);
  const auto b = bits.data();
  auto pi = inner.data();
  auto po = outer.data();
  auto pg = groove.data();
  for (std::size_t i = 0; i < b.size(); ++i) {
    pi[i] = (b[i] & kernels::kMatchInner) ? 1 : 0;
    po[i] = (b[i] & kernels::kMatchOuter) ? 1 : 0;
    pg[i] = (b[i] & kernels::kMatchGroove) ? 1 : 0;
  }
  SeedSets s;
  kernels::erode(inner, cfg.erode_px, s.inner);
  kernels::erode(outer, cfg.erode_px, s.outer);
  kernels::erode(groove, cfg.erode_px, s.groove);
  return s;
}

RegionLabels segment(const RgbImage& rgb, const HsvConfig& cfg) {
  const SeedSets seeds = seed_sets(rgb, cfg);
  const auto si = seeds.inner.data();
  const auto so = seeds.outer.data();
  const auto sg = seeds.groove.data();
  const bool any_inner = std::find(si.begin(), si.end(), 1) != si.end();
  const bool any_outer = std::find(so.begin(), so.end(), 1) != so.end();
  if (!any_inner || !any_outer) {
    throw Error(ErrorKind::Segmentation, "detector/segment",
                fmt::format("empty seed set ({}{})", any_inner ? "" : "inner ", any_outer ? "" : "outer"));
  }

  Grid<std::uint8_t> markers(rgb.pixels.width(), rgb.pixels.height());
  auto m = markers.data();
  for (std::size_t i = 0; i < m.size(); ++i) {
    const int n = si[i] + so[i] + sg[i];
    if (n != 1) continue;
    m[i] = si[i] ? kWsInner : (so[i] ? kWsOuter : kWsBackground);
  }

  Grid<float> gradient;
  kernels::gradient_magnitude(rgb.pixels, gradient);
  const Grid<std::uint8_t> flooded = watershed(gradient, markers);

  // Erosion leaves the edges of the groove to the flood; hand any pixel whose
  // colour is unambiguously groove back to Ignore.
  Grid<std::uint8_t> bits;
  kernels::match_hsv(rgb.pixels, {cfg.inner, cfg.outer, cfg.groove}, bits);
  const auto b = bits.data();

  RegionLabels labels(markers.width(), markers.height());
  const auto f = flooded.data();
  auto l = labels.data();
  for (std::size_t i = 0; i < l.size(); ++i) {
    if (b[i] == kernels::kMatchGroove) {
      l[i] = Region::Ignore;
      continue;
    }
    l[i] = f[i] == kWsInner ? Region::Inner : (f[i] == kWsOuter ? Region::Outer : Region::Ignore);
  }
  return labels;
}

FlapState classify_delta(double delta, double threshold) {
  return std::fabs(delta) > threshold ? FlapState::Detachable : FlapState::NonDetachable;
}

DetachabilityReading classify(const ResidualMap& residual, const RegionLabels& labels, double threshold,
                              double timestamp) {
  if (residual.width() != labels.width() || residual.height() != labels.height()) {
    throw Error(ErrorKind::Pipeline, "detector/classify", "residual and labels differ in size");
  }
  const kernels::RegionSums sums = kernels::region_means(residual, labels);
  if (sums.count_inner == 0 || sums.count_outer == 0) {
    throw Error(ErrorKind::Pipeline, "detector/classify",
                fmt::format("empty region (inner {} px, outer {} px)", sums.count_inner, sums.count_outer));
  }
  DetachabilityReading r;
  r.mean_inner = sums.mean_inner;
  r.mean_outer = sums.mean_outer;
  r.delta = sums.mean_inner - sums.mean_outer;
  r.threshold = threshold;
  r.state = classify_delta(r.delta, threshold);
  r.timestamp = timestamp;
  r.inner_pixels = sums.count_inner;
  r.outer_pixels = sums.count_outer;
  return r;
}

DetectorConfig make_detector_config(const CameraModel& cam, const DrillPath& path, int crop_size) {
  DetectorConfig cfg;
  cfg.crop = default_crop(cam, path, crop_size);
  cfg.ring_width = 3.0 * cam.groove_half_width;
  cfg.mapping = cam.mapping();
  cfg.path = path;
  return cfg;
}

void apply_ring_mask(RegionLabels& labels, const DetectorConfig& cfg) {
  const double half = 0.5 * cfg.ring_width;
  for (int y = 0; y < labels.height(); ++y) {
    auto row = labels.row(y);
    for (int x = 0; x < labels.width(); ++x) {
      const Vec2 q = cfg.mapping.world_at(cfg.crop.x + x, cfg.crop.y + y);
      if (std::fabs(norm(q - cfg.path.center) - cfg.path.radius) <= half) {
        row[static_cast<std::size_t>(x)] = Region::Ignore;
      }
    }
  }
}

RegionLabels segment_crop(const RgbImage& rgb, const DetectorConfig& cfg) {
  RegionLabels labels =
      rgb.window == cfg.crop ? segment(rgb, cfg.hsv) : segment(crop_rgb(rgb, cfg.crop), cfg.hsv);
  apply_ring_mask(labels, cfg);
  return labels;
}

DetachabilityReading measure(const DepthMap& depth, const RegionLabels& labels, const InitialReference& ref,
                             const DetectorConfig& cfg) {
  if (!(ref.crop == cfg.crop)) {
    throw Error(ErrorKind::Pipeline, "detector/detect", "reference crop differs from the detector crop");
  }
  return classify(subtract(depth, ref), labels, cfg.threshold, depth.timestamp);
}

DetachabilityReading detect(const RgbImage& rgb, const DepthMap& depth, const InitialReference& ref,
                            const DetectorConfig& cfg) {
  return measure(depth, segment_crop(rgb, cfg), ref, cfg);
}

}  // namespace drillsim
