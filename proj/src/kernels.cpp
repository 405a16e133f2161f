#include "drillsim/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "drillsim/rng.hpp"

namespace drillsim::kernels {

double groove_depth_at(std::span<const double> depths, double angle) {
  const int n = static_cast<int>(depths.size());
  if (n == 0) return 0.0;
  double a = std::fmod(angle, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  const double pos = a / kTwoPi * n;
  const double fl = std::floor(pos);
  const int k0 = static_cast<int>(fl) % n;
  const int k1 = (k0 + 1) % n;
  const double w = pos - fl;
  return (1.0 - w) * depths[static_cast<std::size_t>(k0)] + w * depths[static_cast<std::size_t>(k1)];
}

namespace {

inline double depth_pixel(const DepthScene& s, int px, int py) {
  const Vec2 q = s.mapping.world_at(px, py);
  double depth = s.surface_depth + s.bias;
  switch (s.shape.classify(q)) {
    case SurfaceClass::Flap:
      depth += s.flap_displacement + dot(s.flap_tilt, q - s.shape.center);
      break;
    case SurfaceClass::Groove: {
      const Vec2 d = q - s.shape.center;
      depth += groove_depth_at(s.groove_depths, std::atan2(d.y, d.x));
      break;
    }
    case SurfaceClass::Body:
      break;
  }
  if (s.noise_sigma > 0.0) {
    const auto index = static_cast<std::uint64_t>(py) * static_cast<std::uint64_t>(s.mapping.sensor_width) +
                       static_cast<std::uint64_t>(px);
    depth += s.noise_sigma * rng::normal_at(s.noise_key, index);
  }
  return depth;
}

inline Rgb rgb_pixel(const RgbScene& s, int px, int py) {
  const Vec2 q = s.mapping.world_at(px, py);
  Hsv c;
  switch (s.shape.classify(q)) {
    case SurfaceClass::Flap: c = s.flap; break;
    case SurfaceClass::Groove: c = s.groove; break;
    case SurfaceClass::Body: c = s.body; break;
  }
  if (s.hue_jitter_deg > 0.0 || s.value_jitter > 0.0) {
    const auto index = 2 * (static_cast<std::uint64_t>(py) * static_cast<std::uint64_t>(s.mapping.sensor_width) +
                            static_cast<std::uint64_t>(px));
    c.h += s.hue_jitter_deg * rng::symmetric_at(s.jitter_key, index);
    c.v += s.value_jitter * rng::symmetric_at(s.jitter_key, index + 1);
  }
  return hsv_to_rgb(c);
}

inline std::uint8_t match_pixel(Rgb c, const HsvWindows& w) {
  const Hsv hsv = rgb_to_hsv(c);
  std::uint8_t bits = 0;
  if (w.inner.contains(hsv)) bits |= kMatchInner;
  if (w.outer.contains(hsv)) bits |= kMatchOuter;
  if (w.groove.contains(hsv)) bits |= kMatchGroove;
  return bits;
}

inline float gradient_pixel(const Grid<Rgb>& img, int x, int y) {
  const int w = img.width();
  const int h = img.height();
  const Rgb& l = img(std::max(x - 1, 0), y);
  const Rgb& r = img(std::min(x + 1, w - 1), y);
  const Rgb& u = img(x, std::max(y - 1, 0));
  const Rgb& d = img(x, std::min(y + 1, h - 1));
  auto sq = [](int a, int b) { const int v = a - b; return v * v; };
  const int sum = sq(r.r, l.r) + sq(r.g, l.g) + sq(r.b, l.b) + sq(d.r, u.r) + sq(d.g, u.g) + sq(d.b, u.b);
  return std::sqrt(static_cast<float>(sum));
}

// Neumaier-compensated accumulator.
struct Accumulator {
  double sum = 0.0;
  double comp = 0.0;
  void add(double v) {
    const double t = sum + v;
    if (std::fabs(sum) >= std::fabs(v)) {
      comp += (sum - t) + v;
    } else {
      comp += (v - t) + sum;
    }
    sum = t;
  }
  double value() const { return sum + comp; }
};

struct RowSums {
  Accumulator inner;
  Accumulator outer;
  std::int64_t n_inner = 0;
  std::int64_t n_outer = 0;
};

// Means are accumulated relative to the first pixel of each region so a
// uniform region returns its value exactly.
struct Shifts {
  double inner = 0.0;
  double outer = 0.0;
};

Shifts find_shifts(const Grid<double>& residual, const Grid<Region>& labels) {
  Shifts s;
  bool got_inner = false;
  bool got_outer = false;
  const auto lab = labels.data();
  const auto val = residual.data();
  for (std::size_t i = 0; i < lab.size() && !(got_inner && got_outer); ++i) {
    if (!got_inner && lab[i] == Region::Inner) { s.inner = val[i]; got_inner = true; }
    if (!got_outer && lab[i] == Region::Outer) { s.outer = val[i]; got_outer = true; }
  }
  return s;
}

RowSums row_sums(const Grid<double>& residual, const Grid<Region>& labels, int y, Shifts s) {
  RowSums r;
  const auto vals = residual.row(y);
  const auto labs = labels.row(y);
  for (std::size_t x = 0; x < vals.size(); ++x) {
    if (labs[x] == Region::Inner) {
      r.inner.add(vals[x] - s.inner);
      ++r.n_inner;
    } else if (labs[x] == Region::Outer) {
      r.outer.add(vals[x] - s.outer);
      ++r.n_outer;
    }
  }
  return r;
}

RegionSums combine(const std::vector<RowSums>& rows, Shifts s) {
  Accumulator inner;
  Accumulator outer;
  RegionSums out;
  for (const auto& r : rows) {
    inner.add(r.inner.value());
    outer.add(r.outer.value());
    out.count_inner += r.n_inner;
    out.count_outer += r.n_outer;
  }
  out.mean_inner = out.count_inner > 0 ? s.inner + inner.value() / static_cast<double>(out.count_inner)
                                       : std::numeric_limits<double>::quiet_NaN();
  out.mean_outer = out.count_outer > 0 ? s.outer + outer.value() / static_cast<double>(out.count_outer)
                                       : std::numeric_limits<double>::quiet_NaN();
  return out;
}

}  // namespace

void render_depth(const DepthScene& scene, PixelRect window, Grid<double>& out) {
  out = Grid<double>(window.width, window.height);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < window.height; ++y) {
    auto row = out.row(y);
    for (int x = 0; x < window.width; ++x) {
      row[static_cast<std::size_t>(x)] = depth_pixel(scene, window.x + x, window.y + y);
    }
  }
}

void render_rgb(const RgbScene& scene, PixelRect window, Grid<Rgb>& out) {
  out = Grid<Rgb>(window.width, window.height);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < window.height; ++y) {
    auto row = out.row(y);
    for (int x = 0; x < window.width; ++x) {
      row[static_cast<std::size_t>(x)] = rgb_pixel(scene, window.x + x, window.y + y);
    }
  }
}

void subtract(const Grid<double>& current, const Grid<double>& initial, Grid<double>& out) {
  out = Grid<double>(current.width(), current.height());
  const auto a = current.data();
  const auto b = initial.data();
  auto o = out.data();
  const auto n = static_cast<std::int64_t>(o.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    o[static_cast<std::size_t>(i)] = a[static_cast<std::size_t>(i)] - b[static_cast<std::size_t>(i)];
  }
}

RegionSums region_means(const Grid<double>& residual, const Grid<Region>& labels) {
  const Shifts s = find_shifts(residual, labels);
  std::vector<RowSums> rows(static_cast<std::size_t>(residual.height()));
#pragma omp parallel for schedule(static)
  for (int y = 0; y < residual.height(); ++y) {
    rows[static_cast<std::size_t>(y)] = row_sums(residual, labels, y, s);
  }
  return combine(rows, s);
}

void match_hsv(const Grid<Rgb>& rgb, const HsvWindows& windows, Grid<std::uint8_t>& out) {
  out = Grid<std::uint8_t>(rgb.width(), rgb.height());
#pragma omp parallel
  {
    // Thread-local copy: stores through uint8_t may alias the shared windows,
    // which otherwise forces a reload per pixel.
    const HsvWindows w = windows;
#pragma omp for schedule(static)
    for (int y = 0; y < rgb.height(); ++y) {
      const auto in = rgb.row(y);
      auto o = out.row(y);
      for (std::size_t x = 0; x < in.size(); ++x) o[x] = match_pixel(in[x], w);
    }
  }
}

void gradient_magnitude(const Grid<Rgb>& rgb, Grid<float>& out) {
  out = Grid<float>(rgb.width(), rgb.height());
#pragma omp parallel for schedule(static)
  for (int y = 0; y < rgb.height(); ++y) {
    auto o = out.row(y);
    for (int x = 0; x < rgb.width(); ++x) o[static_cast<std::size_t>(x)] = gradient_pixel(rgb, x, y);
  }
}

void erode(const Grid<std::uint8_t>& mask, int radius, Grid<std::uint8_t>& out) {
  const int w = mask.width();
  const int h = mask.height();
  if (radius <= 0) {
    out = mask;
    return;
  }
  // Separable: horizontal run test, then vertical.
  Grid<std::uint8_t> tmp(w, h);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    const auto in = mask.row(y);
    auto o = tmp.row(y);
    // Distance to the nearest background pixel on the left / right.
    std::vector<int> left(static_cast<std::size_t>(w));
    int run = 0;
    for (int x = 0; x < w; ++x) {
      run = in[static_cast<std::size_t>(x)] ? run + 1 : 0;
      left[static_cast<std::size_t>(x)] = run;
    }
    run = 0;
    for (int x = w - 1; x >= 0; --x) {
      run = in[static_cast<std::size_t>(x)] ? run + 1 : 0;
      const bool ok = x - radius >= 0 && x + radius < w && left[static_cast<std::size_t>(x)] > radius &&
                      run > radius;
      o[static_cast<std::size_t>(x)] = ok ? 1 : 0;
    }
  }
  out = Grid<std::uint8_t>(w, h);
#pragma omp parallel for schedule(static)
  for (int x = 0; x < w; ++x) {
    int run = 0;
    std::vector<int> up(static_cast<std::size_t>(h));
    for (int y = 0; y < h; ++y) {
      run = tmp(x, y) ? run + 1 : 0;
      up[static_cast<std::size_t>(y)] = run;
    }
    run = 0;
    for (int y = h - 1; y >= 0; --y) {
      run = tmp(x, y) ? run + 1 : 0;
      const bool ok = y - radius >= 0 && y + radius < h && up[static_cast<std::size_t>(y)] > radius &&
                      run > radius;
      out(x, y) = ok ? 1 : 0;
    }
  }
}

namespace ref {

void render_depth(const DepthScene& scene, PixelRect window, Grid<double>& out) {
  out = Grid<double>(window.width, window.height);
  for (int y = 0; y < window.height; ++y) {
    for (int x = 0; x < window.width; ++x) out(x, y) = depth_pixel(scene, window.x + x, window.y + y);
  }
}

void render_rgb(const RgbScene& scene, PixelRect window, Grid<Rgb>& out) {
  out = Grid<Rgb>(window.width, window.height);
  for (int y = 0; y < window.height; ++y) {
    for (int x = 0; x < window.width; ++x) out(x, y) = rgb_pixel(scene, window.x + x, window.y + y);
  }
}

void subtract(const Grid<double>& current, const Grid<double>& initial, Grid<double>& out) {
  out = Grid<double>(current.width(), current.height());
  for (int y = 0; y < current.height(); ++y) {
    for (int x = 0; x < current.width(); ++x) out(x, y) = current(x, y) - initial(x, y);
  }
}

RegionSums region_means(const Grid<double>& residual, const Grid<Region>& labels) {
  long double inner = 0.0L;
  long double outer = 0.0L;
  RegionSums out;
  for (int y = 0; y < residual.height(); ++y) {
    for (int x = 0; x < residual.width(); ++x) {
      if (labels(x, y) == Region::Inner) {
        inner += residual(x, y);
        ++out.count_inner;
      } else if (labels(x, y) == Region::Outer) {
        outer += residual(x, y);
        ++out.count_outer;
      }
    }
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  out.mean_inner = out.count_inner ? static_cast<double>(inner / out.count_inner) : nan;
  out.mean_outer = out.count_outer ? static_cast<double>(outer / out.count_outer) : nan;
  return out;
}

void match_hsv(const Grid<Rgb>& rgb, const HsvWindows& windows, Grid<std::uint8_t>& out) {
  out = Grid<std::uint8_t>(rgb.width(), rgb.height());
  for (int y = 0; y < rgb.height(); ++y) {
    for (int x = 0; x < rgb.width(); ++x) out(x, y) = match_pixel(rgb(x, y), windows);
  }
}

void gradient_magnitude(const Grid<Rgb>& rgb, Grid<float>& out) {
  out = Grid<float>(rgb.width(), rgb.height());
  for (int y = 0; y < rgb.height(); ++y) {
    for (int x = 0; x < rgb.width(); ++x) out(x, y) = gradient_pixel(rgb, x, y);
  }
}

void erode(const Grid<std::uint8_t>& mask, int radius, Grid<std::uint8_t>& out) {
  const int w = mask.width();
  const int h = mask.height();
  out = Grid<std::uint8_t>(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      bool all = true;
      for (int dy = -radius; dy <= radius && all; ++dy) {
        for (int dx = -radius; dx <= radius && all; ++dx) {
          const int xx = x + dx;
          const int yy = y + dy;
          all = xx >= 0 && yy >= 0 && xx < w && yy < h && mask(xx, yy) != 0;
        }
      }
      out(x, y) = all ? 1 : 0;
    }
  }
}

}  // namespace ref

}  // namespace drillsim::kernels
