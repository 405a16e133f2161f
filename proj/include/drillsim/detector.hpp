#pragma once

// Deflection detector: crop -> subtract the initial depth -> segment the RGB
// frame into flap (inner) and body (outer) -> mask out the groove ring ->
// compare mean residual depths.

#include <cstdint>

#include "drillsim/color.hpp"
#include "drillsim/image.hpp"
#include "drillsim/kernels.hpp"
#include "drillsim/sensing.hpp"
#include "drillsim/specimen.hpp"

namespace drillsim {

using CropRect = PixelRect;

// Square crop of side `size` centred on the path centre, clamped to the
// sensor. Throws a config error if it cannot contain the path and groove.
CropRect default_crop(const CameraModel& cam, const DrillPath& path, int size = 240);

struct InitialReference {
  DepthMap depth;  // cropped, depth.window == crop
  CropRect crop;
  int captures = 0;
};

InitialReference capture_initial(const DepthMap& depth, CropRect crop);
// Replaces the stored reference (test and replay use only). Logged.
void recapture(InitialReference& ref, const DepthMap& depth);

DepthMap crop_depth(const DepthMap& depth, CropRect crop);
RgbImage crop_rgb(const RgbImage& rgb, CropRect crop);

// `current` may be the exact crop or any larger window containing it.
ResidualMap subtract(const DepthMap& current, const InitialReference& ref);

struct HsvConfig {
  HsvWindow inner{15.0, 45.0, 0.30, 1.0, 0.30, 1.0};
  HsvWindow outer{190.0, 230.0, 0.30, 1.0, 0.30, 1.0};
  HsvWindow groove{0.0, 360.0, 0.0, 0.25, 0.0, 1.0};
  int erode_px = 3;
};

// Eroded confident HSV matches, one 0/1 mask per class. The sets may overlap
// when windows overlap; overlapping pixels are not used as markers.
struct SeedSets {
  Grid<std::uint8_t> inner;
  Grid<std::uint8_t> outer;
  Grid<std::uint8_t> groove;
};

SeedSets seed_sets(const RgbImage& rgb, const HsvConfig& cfg);

// Marker-based watershed on the RGB gradient. Groove and ambiguous pixels
// come back as Ignore. Throws a segmentation error if the inner or outer seed
// set is empty.
RegionLabels segment(const RgbImage& rgb, const HsvConfig& cfg);

struct DetachabilityReading {
  double mean_inner = 0.0;
  double mean_outer = 0.0;
  double delta = 0.0;
  double threshold = 0.12;
  FlapState state = FlapState::NonDetachable;
  double timestamp = 0.0;
  std::int64_t inner_pixels = 0;
  std::int64_t outer_pixels = 0;
};

// Strict: Detachable iff |delta| > threshold.
FlapState classify_delta(double delta, double threshold);
DetachabilityReading classify(const ResidualMap& residual, const RegionLabels& labels, double threshold,
                              double timestamp = 0.0);

struct DetectorConfig {
  CropRect crop;
  HsvConfig hsv;
  double threshold = 0.12;  // mm
  // Ring mask around the path removed from both regions. Full width in mm;
  // the default is three drill-bit radii.
  double ring_width = 0.75;
  kernels::PixelMapping mapping;
  DrillPath path;
};

DetectorConfig make_detector_config(const CameraModel& cam, const DrillPath& path, int crop_size = 240);

// Clears labels within ring_width/2 of the path circle.
void apply_ring_mask(RegionLabels& labels, const DetectorConfig& cfg);

// Segmentation of the crop with the ring mask applied. `rgb` may be the crop
// or any larger window.
RegionLabels segment_crop(const RgbImage& rgb, const DetectorConfig& cfg);

// Region comparison of one depth frame against precomputed labels.
DetachabilityReading measure(const DepthMap& depth, const RegionLabels& labels, const InitialReference& ref,
                             const DetectorConfig& cfg);

DetachabilityReading detect(const RgbImage& rgb, const DepthMap& depth, const InitialReference& ref,
                            const DetectorConfig& cfg);

}  // namespace drillsim
