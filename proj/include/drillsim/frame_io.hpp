#pragma once

// Frame dumps: depth as a 16-bit PGM in 0.01 mm units, RGB as an 8-bit PPM,
// and a one-line sidecar "timestamp seed trial_id". The sensor window of a
// cropped frame is kept in a "# window x y w h" header comment.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "drillsim/detector.hpp"
#include "drillsim/sensing.hpp"

namespace drillsim {

inline constexpr double kDepthUnitMm = 0.01;

struct FrameMeta {
  double timestamp = 0.0;
  std::uint64_t seed = 0;
  int trial_id = 0;
};

struct FramePaths {
  std::filesystem::path depth;
  std::filesystem::path rgb;
  std::filesystem::path sidecar;
};

FramePaths frame_paths(const std::filesystem::path& dir, std::int64_t index);

void write_pgm16(std::ostream& os, const DepthMap& depth);
void write_ppm(std::ostream& os, const RgbImage& rgb);
DepthMap read_pgm16(std::istream& is);
RgbImage read_ppm(std::istream& is);

void write_frame(const std::filesystem::path& dir, std::int64_t index, const RgbdFrame& frame,
                 const FrameMeta& meta);

struct StoredFrame {
  RgbdFrame frame;
  FrameMeta meta;
};

StoredFrame read_frame(const FramePaths& paths);

// All frames in `dir`, ordered by index. Throws an I/O error if the directory
// is missing or holds no frames.
std::vector<FramePaths> list_frames(const std::filesystem::path& dir);

// Offline detector: the first frame is the initial reference, every frame
// (including the first) yields one timeline row.
std::vector<DetachabilityReading> detect_directory(const std::filesystem::path& dir,
                                                   const DetectorConfig& cfg);

void write_timeline_csv(std::ostream& os, const std::vector<DetachabilityReading>& readings);

}  // namespace drillsim
