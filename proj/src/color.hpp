// SPDX-License-Identifier: Apache-2.0
// Unquantized color-space conversions. Channels are on the 0..255 scale,
// hue in degrees [0, 360), saturation in [0, 1].
#pragma once

#include <algorithm>
#include <cmath>

namespace histaug::detail {

struct Rgb {
  double r, g, b;
};

struct Hsv {
  double h, s, v;
};

inline double luma(double r, double g, double b) { return 0.299 * r + 0.587 * g + 0.114 * b; }

inline Hsv rgb_to_hsv(const Rgb& c) {
  const double mx = std::max({c.r, c.g, c.b});
  const double mn = std::min({c.r, c.g, c.b});
  const double delta = mx - mn;
  Hsv out{0.0, 0.0, mx};
  if (mx <= 0.0 || delta <= 0.0) return out;
  out.s = delta / mx;
  double h = 0.0;
  if (mx == c.r) {
    h = (c.g - c.b) / delta;
  } else if (mx == c.g) {
    h = 2.0 + (c.b - c.r) / delta;
  } else {
    h = 4.0 + (c.r - c.g) / delta;
  }
  h *= 60.0;
  if (h < 0.0) h += 360.0;
  out.h = h;
  return out;
}

inline double wrap_degrees(double h) {
  h = std::fmod(h, 360.0);
  if (h < 0.0) h += 360.0;
  return h;
}

inline Rgb hsv_to_rgb(const Hsv& c) {
  const double chroma = c.v * c.s;
  if (chroma <= 0.0) return {c.v, c.v, c.v};
  const double hp = wrap_degrees(c.h) / 60.0;
  const double x = chroma * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
  const double m = c.v - chroma;
  double r = 0.0, g = 0.0, b = 0.0;
  switch (static_cast<int>(hp)) {
    case 0: r = chroma; g = x; break;
    case 1: r = x; g = chroma; break;
    case 2: g = chroma; b = x; break;
    case 3: g = x; b = chroma; break;
    case 4: r = x; b = chroma; break;
    default: r = chroma; b = x; break;
  }
  return {r + m, g + m, b + m};
}

}  // namespace histaug::detail
