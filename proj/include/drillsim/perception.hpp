#pragma once

// Frame pipeline used by the workflow: renders the crop window of the
// specimen, runs the detector, and carries the last reading forward when the
// scene has not changed.

#include <cstdint>
#include <filesystem>
#include <optional>

#include "drillsim/detector.hpp"
#include "drillsim/sensing.hpp"
#include "drillsim/specimen.hpp"

namespace drillsim {

struct PerceptionOptions {
  // Skip rendering when the flap pose has not changed since the last real
  // frame; the detector output would differ only by sensor noise.
  bool elide_static_frames = true;
  std::optional<std::filesystem::path> dump_dir;
  int dump_stride = 1;
  // Camera dropout fault: no frames in [dropout_start, dropout_start + dropout_duration).
  double dropout_start = -1.0;
  double dropout_duration = 0.0;
};

struct PerceptionStats {
  std::int64_t frames = 0;
  std::int64_t rendered = 0;
  std::int64_t segmented = 0;
  std::int64_t dumped = 0;
};

class FramePipeline {
 public:
  FramePipeline(CameraModel cam, DetectorConfig cfg, PerceptionOptions options, std::uint64_t seed, int trial_id);

  // Renders the undisturbed frame at `tick` and stores it as the reference.
  void capture_initial(const SpecimenTruth& spec, std::int64_t tick);

  bool frame_available(std::int64_t tick) const;

  // Reading for the frame at `tick`. `fresh` forces a render (pending
  // debounce, end of a drilling cycle).
  DetachabilityReading on_frame(const SpecimenTruth& spec, std::int64_t tick, bool fresh = false);

  const PerceptionStats& stats() const { return stats_; }
  const DetectorConfig& config() const { return cfg_; }
  const CameraModel& camera() const { return cam_; }

 private:
  // Depth is rendered per frame. The RGB image and its segmentation only
  // change with the groove and are rebuilt when groove_revision moves.
  DepthMap render_depth(const SpecimenTruth& spec, std::int64_t tick) const;
  void refresh_labels(const SpecimenTruth& spec);
  void maybe_dump(const DepthMap& depth, std::int64_t tick);

  CameraModel cam_;
  DetectorConfig cfg_;
  PerceptionOptions options_;
  std::uint64_t seed_;
  int trial_id_;
  InitialReference ref_;
  std::optional<DetachabilityReading> last_;
  std::uint64_t last_pose_ = 0;
  RgbImage rgb_;
  RegionLabels labels_;
  std::optional<std::uint64_t> labels_rev_;
  PerceptionStats stats_;
};

}  // namespace drillsim
