#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "drillsim/error.hpp"
#include "drillsim/frame_io.hpp"
#include "test_support.hpp"

using namespace drillsim;
using namespace drillsim::testing;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("drillsim_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(d);
  return d;
}

}  // namespace

TEST(FrameIo, PathsAreZeroPadded) {
  const FramePaths p = frame_paths("out", 42);
  EXPECT_EQ(p.depth.filename(), "frame_000042_depth.pgm");
  EXPECT_EQ(p.rgb.filename(), "frame_000042_rgb.ppm");
  EXPECT_EQ(p.sidecar.filename(), "frame_000042.txt");
}

TEST(FrameIo, DepthRoundTripQuantizesToHundredths) {
  const Scene s = default_scene(2);
  const DepthMap d = render_depth_map(s.spec, s.cam, 4, s.cfg.crop);
  std::stringstream ss;
  write_pgm16(ss, d);
  EXPECT_EQ(ss.str().rfind("P5\n", 0), 0u);
  const DepthMap back = read_pgm16(ss);
  ASSERT_EQ(back.window, d.window);
  ASSERT_EQ(back.mm.width(), d.mm.width());
  for (std::size_t i = 0; i < d.mm.size(); ++i) {
    ASSERT_NEAR(back.mm.data()[i], d.mm.data()[i], 0.5 * kDepthUnitMm + 1e-9);
    ASSERT_EQ(back.mm.data()[i], std::lround(d.mm.data()[i] / kDepthUnitMm) * kDepthUnitMm);
  }
}

TEST(FrameIo, RgbRoundTripIsExact) {
  const Scene s = default_scene(2, 0.5);
  const RgbImage rgb = render_rgb_image(s.spec, s.cam, 4, s.cfg.crop);
  std::stringstream ss;
  write_ppm(ss, rgb);
  const RgbImage back = read_ppm(ss);
  EXPECT_EQ(back.window, rgb.window);
  EXPECT_EQ(back.pixels, rgb.pixels);
}

TEST(FrameIo, RejectsMalformedImages) {
  std::istringstream bad_magic("P2\n2 2\n255\n");
  EXPECT_THROW(read_pgm16(bad_magic), Error);
  std::istringstream eight_bit("P5\n2 2\n255\n");
  EXPECT_THROW(read_pgm16(eight_bit), Error);
  std::istringstream truncated("P5\n2 2\n65535\nab");
  try {
    read_pgm16(truncated);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Io);
  }
}

TEST(FrameIo, FrameWithSidecar) {
  const fs::path dir = fresh_dir("sidecar");
  const Scene s = default_scene(2);
  const RgbdFrame f = render_rgbd(s.spec, s.cam, 9, s.cfg.crop);
  write_frame(dir, 7, f, {1.25, 99, 3});
  std::ifstream side(frame_paths(dir, 7).sidecar);
  std::string line;
  std::getline(side, line);
  EXPECT_EQ(line, "1.250000 99 3");
  const StoredFrame back = read_frame(frame_paths(dir, 7));
  EXPECT_EQ(back.meta.seed, 99u);
  EXPECT_EQ(back.meta.trial_id, 3);
  EXPECT_EQ(back.meta.timestamp, 1.25);
  EXPECT_EQ(back.frame.rgb.pixels, f.rgb.pixels);
  fs::remove_all(dir);
}

TEST(FrameIo, ListingRequiresFrames) {
  const fs::path dir = fresh_dir("empty");
  EXPECT_THROW(list_frames(dir), Error);
  fs::create_directories(dir);
  EXPECT_THROW(list_frames(dir), Error);
  fs::remove_all(dir);
}

TEST(FrameIo, OfflineDetectionTimeline) {
  const fs::path dir = fresh_dir("timeline");
  const Scene s = default_scene(4);
  write_frame(dir, 0, render_rgbd(s.spec, s.cam, 1, s.cfg.crop), {0.0, 1, 1});
  write_frame(dir, 1, render_rgbd(s.spec, s.cam, 2, s.cfg.crop), {0.05, 1, 1});
  write_frame(dir, 2, render_rgbd(displaced(s.spec, 0.2), s.cam, 3, s.cfg.crop), {0.10, 1, 1});
  const auto rows = detect_directory(dir, s.cfg);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].delta, 0.0);
  EXPECT_EQ(rows[1].state, FlapState::NonDetachable);
  EXPECT_EQ(rows[2].state, FlapState::Detachable);
  EXPECT_NEAR(rows[2].delta, 0.2, 0.01);
  EXPECT_EQ(rows[2].timestamp, 0.10);
  std::ostringstream os;
  write_timeline_csv(os, rows);
  EXPECT_EQ(os.str().rfind("timestamp,mean_inner,mean_outer,delta,state\n", 0), 0u);
  fs::remove_all(dir);
}
