#pragma once

#include <cassert>
#include <cstdint>
#include <span>
#include <vector>

namespace drillsim {

// Dense row-major 2-D buffer.
template <class T>
class Grid {
 public:
  Grid() = default;
  Grid(int width, int height, T fill = T{})
      : width_(width), height_(height),
        data_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill) {}

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& operator()(int x, int y) {
    assert(x >= 0 && x < width_ && y >= 0 && y < height_);
    return data_[static_cast<std::size_t>(y) * width_ + x];
  }
  const T& operator()(int x, int y) const {
    assert(x >= 0 && x < width_ && y >= 0 && y < height_);
    return data_[static_cast<std::size_t>(y) * width_ + x];
  }

  std::span<T> row(int y) {
    return {data_.data() + static_cast<std::size_t>(y) * width_, static_cast<std::size_t>(width_)};
  }
  std::span<const T> row(int y) const {
    return {data_.data() + static_cast<std::size_t>(y) * width_, static_cast<std::size_t>(width_)};
  }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
  friend bool operator==(Rgb, Rgb) = default;
};

// Pixel rectangle in full-sensor coordinates.
struct PixelRect {
  int x = 0;
  int y = 0;
  int width = 0;
  int height = 0;

  bool contains(const PixelRect& other) const {
    return other.x >= x && other.y >= y && other.x + other.width <= x + width &&
           other.y + other.height <= y + height;
  }
  friend bool operator==(const PixelRect&, const PixelRect&) = default;
};

// A depth frame. `window` places the buffer inside the full sensor; a full
// frame has window = {0, 0, sensor width, sensor height}.
struct DepthMap {
  Grid<double> mm;
  PixelRect window;
  double timestamp = 0.0;
};

struct RgbImage {
  Grid<Rgb> pixels;
  PixelRect window;
  double timestamp = 0.0;
};

enum class Region : std::uint8_t { Ignore = 0, Inner = 1, Outer = 2 };

using ResidualMap = Grid<double>;
using RegionLabels = Grid<Region>;

}  // namespace drillsim
