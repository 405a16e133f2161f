#pragma once

#include "drillsim/image.hpp"

namespace drillsim {

// Hue in degrees [0, 360), saturation and value in [0, 1].
struct Hsv {
  double h = 0.0;
  double s = 0.0;
  double v = 0.0;
};

Hsv rgb_to_hsv(Rgb c);
Rgb hsv_to_rgb(Hsv c);

// Inclusive window. hue_min > hue_max wraps through 0 degrees.
struct HsvWindow {
  double hue_min = 0.0;
  double hue_max = 360.0;
  double sat_min = 0.0;
  double sat_max = 1.0;
  double val_min = 0.0;
  double val_max = 1.0;

  bool contains(const Hsv& c) const;
};

}  // namespace drillsim
