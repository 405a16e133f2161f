#include "drillsim/frame_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <regex>
#include <sstream>

#include <fmt/format.h>

#include "drillsim/error.hpp"

namespace drillsim {

namespace fs = std::filesystem;

FramePaths frame_paths(const fs::path& dir, std::int64_t index) {
  const std::string stem = fmt::format("frame_{:06d}", index);
  return {dir / (stem + "_depth.pgm"), dir / (stem + "_rgb.ppm"), dir / (stem + ".txt")};
}

namespace {

void write_header(std::ostream& os, const char* magic, PixelRect window, int maxval) {
  os << magic << '\n'
     << fmt::format("# window {} {} {} {}\n", window.x, window.y, window.width, window.height)
     << window.width << ' ' << window.height << '\n'
     << maxval << '\n';
}

struct Header {
  int width = 0;
  int height = 0;
  int maxval = 0;
  PixelRect window;
  bool has_window = false;
};

// Reads whitespace-separated header tokens, collecting "# window" comments.
Header read_header(std::istream& is, const std::string& magic) {
  std::string m;
  is >> m;
  if (m != magic) {
    throw Error(ErrorKind::Io, "frame_io/read", fmt::format("expected {} magic, got '{}'", magic, m));
  }
  Header h;
  int* fields[3] = {&h.width, &h.height, &h.maxval};
  int got = 0;
  while (got < 3) {
    is >> std::ws;
    if (is.peek() == '#') {
      std::string line;
      std::getline(is, line);
      std::istringstream ls(line);
      std::string hash, key;
      ls >> hash >> key;
      if (key == "window" && (ls >> h.window.x >> h.window.y >> h.window.width >> h.window.height)) {
        h.has_window = true;
      }
      continue;
    }
    if (!(is >> *fields[got])) throw Error(ErrorKind::Io, "frame_io/read", "truncated image header");
    ++got;
  }
  is.get();  // single whitespace before the raster
  if (h.width <= 0 || h.height <= 0) throw Error(ErrorKind::Io, "frame_io/read", "bad image size");
  if (!h.has_window) h.window = {0, 0, h.width, h.height};
  if (h.window.width != h.width || h.window.height != h.height) {
    throw Error(ErrorKind::Io, "frame_io/read", "window comment disagrees with image size");
  }
  return h;
}

}  // namespace

void write_pgm16(std::ostream& os, const DepthMap& depth) {
  const PixelRect window = depth.window.width > 0 ? depth.window
                                                  : PixelRect{0, 0, depth.mm.width(), depth.mm.height()};
  write_header(os, "P5", window, 65535);
  std::vector<char> raster;
  raster.reserve(depth.mm.size() * 2);
  for (double v : depth.mm.data()) {
    const long q = std::lround(v / kDepthUnitMm);
    const auto u = static_cast<std::uint16_t>(std::clamp(q, 0L, 65535L));
    raster.push_back(static_cast<char>(u >> 8));
    raster.push_back(static_cast<char>(u & 0xFF));
  }
  os.write(raster.data(), static_cast<std::streamsize>(raster.size()));
}

void write_ppm(std::ostream& os, const RgbImage& rgb) {
  const PixelRect window = rgb.window.width > 0 ? rgb.window
                                                : PixelRect{0, 0, rgb.pixels.width(), rgb.pixels.height()};
  write_header(os, "P6", window, 255);
  std::vector<char> raster;
  raster.reserve(rgb.pixels.size() * 3);
  for (const Rgb& c : rgb.pixels.data()) {
    raster.push_back(static_cast<char>(c.r));
    raster.push_back(static_cast<char>(c.g));
    raster.push_back(static_cast<char>(c.b));
  }
  os.write(raster.data(), static_cast<std::streamsize>(raster.size()));
}

DepthMap read_pgm16(std::istream& is) {
  const Header h = read_header(is, "P5");
  if (h.maxval <= 255) throw Error(ErrorKind::Io, "frame_io/read", "depth PGM must be 16-bit");
  std::vector<unsigned char> raster(static_cast<std::size_t>(h.width) * h.height * 2);
  is.read(reinterpret_cast<char*>(raster.data()), static_cast<std::streamsize>(raster.size()));
  if (is.gcount() != static_cast<std::streamsize>(raster.size())) {
    throw Error(ErrorKind::Io, "frame_io/read", "truncated depth raster");
  }
  DepthMap d;
  d.mm = Grid<double>(h.width, h.height);
  d.window = h.window;
  auto out = d.mm.data();
  for (std::size_t i = 0; i < out.size(); ++i) {
    const unsigned v = (static_cast<unsigned>(raster[2 * i]) << 8) | raster[2 * i + 1];
    out[i] = static_cast<double>(v) * kDepthUnitMm;
  }
  return d;
}

RgbImage read_ppm(std::istream& is) {
  const Header h = read_header(is, "P6");
  if (h.maxval != 255) throw Error(ErrorKind::Io, "frame_io/read", "RGB PPM must be 8-bit");
  std::vector<unsigned char> raster(static_cast<std::size_t>(h.width) * h.height * 3);
  is.read(reinterpret_cast<char*>(raster.data()), static_cast<std::streamsize>(raster.size()));
  if (is.gcount() != static_cast<std::streamsize>(raster.size())) {
    throw Error(ErrorKind::Io, "frame_io/read", "truncated RGB raster");
  }
  RgbImage img;
  img.pixels = Grid<Rgb>(h.width, h.height);
  img.window = h.window;
  auto out = img.pixels.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = {raster[3 * i], raster[3 * i + 1], raster[3 * i + 2]};
  return img;
}

void write_frame(const fs::path& dir, std::int64_t index, const RgbdFrame& frame, const FrameMeta& meta) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Io, "frame_io/write", fmt::format("cannot create {}: {}", dir.string(), ec.message()));
  const FramePaths p = frame_paths(dir, index);
  auto open = [](const fs::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error(ErrorKind::Io, "frame_io/write", fmt::format("cannot open {}", path.string()));
    return os;
  };
  {
    auto os = open(p.depth);
    write_pgm16(os, frame.depth);
  }
  {
    auto os = open(p.rgb);
    write_ppm(os, frame.rgb);
  }
  auto os = open(p.sidecar);
  os << fmt::format("{:.6f} {} {}\n", meta.timestamp, meta.seed, meta.trial_id);
  if (!os) throw Error(ErrorKind::Io, "frame_io/write", fmt::format("write failed for {}", p.sidecar.string()));
}

StoredFrame read_frame(const FramePaths& paths) {
  auto open = [](const fs::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error(ErrorKind::Io, "frame_io/read", fmt::format("cannot open {}", path.string()));
    return is;
  };
  StoredFrame s;
  {
    auto is = open(paths.depth);
    s.frame.depth = read_pgm16(is);
  }
  {
    auto is = open(paths.rgb);
    s.frame.rgb = read_ppm(is);
  }
  auto is = open(paths.sidecar);
  if (!(is >> s.meta.timestamp >> s.meta.seed >> s.meta.trial_id)) {
    throw Error(ErrorKind::Io, "frame_io/read", fmt::format("malformed sidecar {}", paths.sidecar.string()));
  }
  s.frame.depth.timestamp = s.meta.timestamp;
  s.frame.rgb.timestamp = s.meta.timestamp;
  if (!(s.frame.depth.window == s.frame.rgb.window)) {
    throw Error(ErrorKind::Io, "frame_io/read", "depth and RGB windows differ");
  }
  return s;
}

std::vector<FramePaths> list_frames(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) {
    throw Error(ErrorKind::Io, "frame_io/list", fmt::format("no frame directory {}", dir.string()));
  }
  static const std::regex pattern(R"(frame_(\d+)\.txt)");
  std::map<std::int64_t, FramePaths> found;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    std::smatch m;
    if (std::regex_match(name, m, pattern)) {
      const std::int64_t index = std::stoll(m[1].str());
      found.emplace(index, frame_paths(dir, index));
    }
  }
  if (found.empty()) throw Error(ErrorKind::Io, "frame_io/list", fmt::format("no frames in {}", dir.string()));
  std::vector<FramePaths> out;
  out.reserve(found.size());
  for (auto& [index, paths] : found) out.push_back(std::move(paths));
  return out;
}

std::vector<DetachabilityReading> detect_directory(const fs::path& dir, const DetectorConfig& cfg) {
  const auto frames = list_frames(dir);
  std::vector<DetachabilityReading> out;
  out.reserve(frames.size());
  InitialReference ref;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const StoredFrame f = read_frame(frames[i]);
    if (i == 0) ref = capture_initial(f.frame.depth, cfg.crop);
    out.push_back(detect(f.frame.rgb, f.frame.depth, ref, cfg));
  }
  return out;
}

void write_timeline_csv(std::ostream& os, const std::vector<DetachabilityReading>& readings) {
  os << "timestamp,mean_inner,mean_outer,delta,state\n";
  for (const auto& r : readings) {
    os << fmt::format("{:.6f},{:.6f},{:.6f},{:.6f},{}\n", r.timestamp, r.mean_inner, r.mean_outer, r.delta,
                      to_string(r.state));
  }
}

}  // namespace drillsim
