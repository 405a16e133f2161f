#pragma once

#include <cstdint>

#include "drillsim/image.hpp"

namespace drillsim {

// Marker values understood by `watershed`. Zero means "flood me".
enum WatershedLabel : std::uint8_t {
  kWsUnlabeled = 0,
  kWsInner = 1,
  kWsOuter = 2,
  kWsBackground = 3,
  kWsBoundary = 255,
};

// Meyer flooding from the given markers over `cost`, 4-connected, lowest cost
// first with FIFO order among equal costs. A pixel reached by both Inner and
// Outer becomes kWsBoundary; a pixel contested between a region and the
// background goes to the region. Pixels never reached stay kWsUnlabeled.
Grid<std::uint8_t> watershed(const Grid<float>& cost, const Grid<std::uint8_t>& markers);

}  // namespace drillsim
