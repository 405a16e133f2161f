#include "drillsim/perception.hpp"

#include "drillsim/error.hpp"
#include "drillsim/frame_io.hpp"
#include "drillsim/rng.hpp"

namespace drillsim {

FramePipeline::FramePipeline(CameraModel cam, DetectorConfig cfg, PerceptionOptions options, std::uint64_t seed,
                             int trial_id)
    : cam_(std::move(cam)), cfg_(std::move(cfg)), options_(std::move(options)), seed_(seed), trial_id_(trial_id) {
  if (options_.dump_stride < 1) {
    throw Error(ErrorKind::Config, "perception", "dump stride must be >= 1");
  }
}

DepthMap FramePipeline::render_depth(const SpecimenTruth& spec, std::int64_t tick) const {
  // Noise is keyed by the frame tick, so a frame is reproducible on its own.
  DepthMap d = render_depth_map(spec, cam_, rng::derive(seed_, rng::kDepthNoise, static_cast<std::uint64_t>(tick)),
                                cfg_.crop);
  d.timestamp = SimClock::seconds(tick);
  return d;
}

void FramePipeline::refresh_labels(const SpecimenTruth& spec) {
  if (labels_rev_ == spec.groove_revision) return;
  rgb_ = render_rgb_image(spec, cam_, rng::derive(seed_, rng::kHueJitter), cfg_.crop);
  labels_ = segment_crop(rgb_, cfg_);
  labels_rev_ = spec.groove_revision;
  ++stats_.segmented;
}

void FramePipeline::maybe_dump(const DepthMap& depth, std::int64_t tick) {
  if (!options_.dump_dir) return;
  const std::int64_t index = tick / SimClock::kFramePeriod;
  if (index % options_.dump_stride != 0) return;
  RgbdFrame f{rgb_, depth};
  f.rgb.timestamp = depth.timestamp;
  write_frame(*options_.dump_dir, index, f, {depth.timestamp, seed_, trial_id_});
  ++stats_.dumped;
}

void FramePipeline::capture_initial(const SpecimenTruth& spec, std::int64_t tick) {
  const DepthMap d = render_depth(spec, tick);
  ref_ = drillsim::capture_initial(d, cfg_.crop);
  refresh_labels(spec);
  maybe_dump(d, tick);
  last_.reset();
  last_pose_ = spec.pose_revision;
}

bool FramePipeline::frame_available(std::int64_t tick) const {
  if (options_.dropout_start < 0.0) return true;
  const double t = SimClock::seconds(tick);
  return !(t >= options_.dropout_start && t < options_.dropout_start + options_.dropout_duration);
}

DetachabilityReading FramePipeline::on_frame(const SpecimenTruth& spec, std::int64_t tick, bool fresh) {
  ++stats_.frames;
  const bool stale = !last_ || spec.pose_revision != last_pose_;
  if (options_.elide_static_frames && !fresh && !stale) {
    DetachabilityReading r = *last_;
    r.timestamp = SimClock::seconds(tick);
    return r;
  }
  const DepthMap d = render_depth(spec, tick);
  ++stats_.rendered;
  refresh_labels(spec);
  maybe_dump(d, tick);
  last_ = measure(d, labels_, ref_, cfg_);
  last_pose_ = spec.pose_revision;
  return *last_;
}

}  // namespace drillsim
