#include "drillsim/watershed.hpp"

#include <cstdint>
#include <functional>
#include <queue>
#include <tuple>
#include <vector>

namespace drillsim {

namespace {

struct Entry {
  float cost;
  std::uint64_t seq;
  std::uint32_t index;
  bool operator>(const Entry& o) const { return std::tie(cost, seq) > std::tie(o.cost, o.seq); }
};

}  // namespace

Grid<std::uint8_t> watershed(const Grid<float>& cost, const Grid<std::uint8_t>& markers) {
  const int w = cost.width();
  const int h = cost.height();
  Grid<std::uint8_t> out = markers;
  auto lab = out.data();
  const auto c = cost.data();
  std::vector<std::uint8_t> queued(lab.size(), 0);
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> pq;
  std::uint64_t seq = 0;

  auto push_neighbours = [&](int x, int y) {
    const int nx[4] = {x - 1, x + 1, x, x};
    const int ny[4] = {y, y, y - 1, y + 1};
    for (int i = 0; i < 4; ++i) {
      if (nx[i] < 0 || ny[i] < 0 || nx[i] >= w || ny[i] >= h) continue;
      const auto j = static_cast<std::size_t>(ny[i]) * w + nx[i];
      if (lab[j] != kWsUnlabeled || queued[j]) continue;
      queued[j] = 1;
      pq.push({c[j], seq++, static_cast<std::uint32_t>(j)});
    }
  };

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const auto v = out(x, y);
      if (v == kWsInner || v == kWsOuter || v == kWsBackground) push_neighbours(x, y);
    }
  }

  while (!pq.empty()) {
    const Entry e = pq.top();
    pq.pop();
    const int x = static_cast<int>(e.index % static_cast<std::uint32_t>(w));
    const int y = static_cast<int>(e.index / static_cast<std::uint32_t>(w));
    bool inner = false, outer = false, background = false;
    const int nx[4] = {x - 1, x + 1, x, x};
    const int ny[4] = {y, y, y - 1, y + 1};
    for (int i = 0; i < 4; ++i) {
      if (nx[i] < 0 || ny[i] < 0 || nx[i] >= w || ny[i] >= h) continue;
      switch (out(nx[i], ny[i])) {
        case kWsInner: inner = true; break;
        case kWsOuter: outer = true; break;
        case kWsBackground: background = true; break;
        default: break;
      }
    }
    std::uint8_t label;
    if (inner && outer) {
      label = kWsBoundary;
    } else if (inner) {
      label = kWsInner;
    } else if (outer) {
      label = kWsOuter;
    } else if (background) {
      label = kWsBackground;
    } else {
      continue;  // only boundary neighbours
    }
    lab[e.index] = label;
    if (label != kWsBoundary) push_neighbours(x, y);
  }
  return out;
}

}  // namespace drillsim
