#include <benchmark/benchmark.h>

#include <vector>

#include "drillsim/detector.hpp"
#include "drillsim/kernels.hpp"
#include "drillsim/sensing.hpp"

using namespace drillsim;
namespace k = drillsim::kernels;

namespace {

// A half-drilled groove around the sensor centre, rendered into a square
// window of side `side` px (240 is the detector ROI, 540 the full height).
struct Scene {
  std::vector<double> grooves;
  k::DepthScene depth;
  k::RgbScene rgb;
  PixelRect window;

  explicit Scene(int side) {
    for (int i = 0; i < 32; ++i) grooves.push_back(0.15 + 0.005 * (i % 7));
    CameraModel cam;
    depth.mapping = cam.mapping();
    depth.shape = {{0.0, 0.0}, 4.0, cam.groove_half_width};
    depth.groove_depths = grooves;
    depth.flap_displacement = 0.05;
    depth.noise_sigma = 0.02;
    depth.noise_key = 7;
    rgb.mapping = depth.mapping;
    rgb.shape = depth.shape;
    rgb.flap = cam.palette.flap;
    rgb.groove = cam.palette.groove;
    rgb.body = cam.palette.body;
    rgb.hue_jitter_deg = 4.0;
    rgb.value_jitter = 0.03;
    rgb.jitter_key = 8;
    window = {480 - side / 2, 270 - side / 2, side, side};
  }
};

template <bool Ref>
void BM_RenderDepth(benchmark::State& st) {
  const Scene s(static_cast<int>(st.range(0)));
  Grid<double> out;
  for (auto _ : st) {
    if constexpr (Ref) k::ref::render_depth(s.depth, s.window, out);
    else k::render_depth(s.depth, s.window, out);
    benchmark::DoNotOptimize(out.data());
  }
  st.SetItemsProcessed(st.iterations() * st.range(0) * st.range(0));
}

template <bool Ref>
void BM_RenderRgb(benchmark::State& st) {
  const Scene s(static_cast<int>(st.range(0)));
  Grid<Rgb> out;
  for (auto _ : st) {
    if constexpr (Ref) k::ref::render_rgb(s.rgb, s.window, out);
    else k::render_rgb(s.rgb, s.window, out);
    benchmark::DoNotOptimize(out.data());
  }
  st.SetItemsProcessed(st.iterations() * st.range(0) * st.range(0));
}

template <bool Ref>
void BM_Subtract(benchmark::State& st) {
  Scene s(static_cast<int>(st.range(0)));
  Grid<double> cur, init, out;
  k::ref::render_depth(s.depth, s.window, cur);
  s.depth.flap_displacement = 0.0;
  s.depth.noise_key = 9;
  k::ref::render_depth(s.depth, s.window, init);
  for (auto _ : st) {
    if constexpr (Ref) k::ref::subtract(cur, init, out);
    else k::subtract(cur, init, out);
    benchmark::DoNotOptimize(out.data());
  }
  st.SetItemsProcessed(st.iterations() * st.range(0) * st.range(0));
}

template <bool Ref>
void BM_MatchHsv(benchmark::State& st) {
  const Scene s(static_cast<int>(st.range(0)));
  Grid<Rgb> rgb;
  k::ref::render_rgb(s.rgb, s.window, rgb);
  const HsvConfig cfg;
  const k::HsvWindows w{cfg.inner, cfg.outer, cfg.groove};
  Grid<std::uint8_t> out;
  for (auto _ : st) {
    if constexpr (Ref) k::ref::match_hsv(rgb, w, out);
    else k::match_hsv(rgb, w, out);
    benchmark::DoNotOptimize(out.data());
  }
  st.SetItemsProcessed(st.iterations() * st.range(0) * st.range(0));
}

template <bool Ref>
void BM_Gradient(benchmark::State& st) {
  const Scene s(static_cast<int>(st.range(0)));
  Grid<Rgb> rgb;
  k::ref::render_rgb(s.rgb, s.window, rgb);
  Grid<float> out;
  for (auto _ : st) {
    if constexpr (Ref) k::ref::gradient_magnitude(rgb, out);
    else k::gradient_magnitude(rgb, out);
    benchmark::DoNotOptimize(out.data());
  }
  st.SetItemsProcessed(st.iterations() * st.range(0) * st.range(0));
}

template <bool Ref>
void BM_Erode(benchmark::State& st) {
  const Scene s(static_cast<int>(st.range(0)));
  Grid<Rgb> rgb;
  k::ref::render_rgb(s.rgb, s.window, rgb);
  const HsvConfig cfg;
  Grid<std::uint8_t> bits;
  k::ref::match_hsv(rgb, {cfg.inner, cfg.outer, cfg.groove}, bits);
  Grid<std::uint8_t> mask(bits.width(), bits.height());
  for (std::size_t i = 0; i < mask.size(); ++i) mask.data()[i] = (bits.data()[i] & k::kMatchInner) ? 1 : 0;
  Grid<std::uint8_t> out;
  for (auto _ : st) {
    if constexpr (Ref) k::ref::erode(mask, 3, out);
    else k::erode(mask, 3, out);
    benchmark::DoNotOptimize(out.data());
  }
  st.SetItemsProcessed(st.iterations() * st.range(0) * st.range(0));
}

template <bool Ref>
void BM_RegionMeans(benchmark::State& st) {
  const Scene s(static_cast<int>(st.range(0)));
  Grid<double> residual;
  k::ref::render_depth(s.depth, s.window, residual);
  Grid<Rgb> rgb;
  k::ref::render_rgb(s.rgb, s.window, rgb);
  const RegionLabels labels = segment(RgbImage{rgb, s.window, 0.0}, HsvConfig{});
  for (auto _ : st) {
    k::RegionSums r;
    if constexpr (Ref) r = k::ref::region_means(residual, labels);
    else r = k::region_means(residual, labels);
    benchmark::DoNotOptimize(r);
  }
  st.SetItemsProcessed(st.iterations() * st.range(0) * st.range(0));
}

#define KERNEL_PAIR(fn)                                     \
  BENCHMARK(fn<false>)->Name(#fn "/omp")->Arg(240)->Arg(540); \
  BENCHMARK(fn<true>)->Name(#fn "/ref")->Arg(240)->Arg(540)

KERNEL_PAIR(BM_RenderDepth);
KERNEL_PAIR(BM_RenderRgb);
KERNEL_PAIR(BM_Subtract);
KERNEL_PAIR(BM_MatchHsv);
KERNEL_PAIR(BM_Gradient);
KERNEL_PAIR(BM_Erode);
KERNEL_PAIR(BM_RegionMeans);

}  // namespace

BENCHMARK_MAIN();
