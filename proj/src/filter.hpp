// SPDX-License-Identifier: Apache-2.0
// Convolution helpers shared by the blur and elastic transforms. Borders are
// mirrored without edge duplication.
#pragma once

#include <vector>

#include "histaug/image.hpp"

namespace histaug::detail {

/// Square kernel, row-major, odd or even side. The anchor is (side-1)/2.
struct Kernel2d {
  int side = 1;
  std::vector<double> taps{1.0};

  double at(int x, int y) const { return taps[static_cast<std::size_t>(y) * side + x]; }
};

/// Normalized Gaussian taps for offsets -radius..radius.
std::vector<double> gaussian_taps(double sigma, int radius);

/// Separable filtering of a single float plane.
std::vector<double> convolve_plane_separable(const std::vector<double>& plane, int width,
                                             int height, const std::vector<double>& taps);

/// Separable filtering of every channel; rounds once at the end.
Patch convolve_separable(const Patch& src, const std::vector<double>& taps);

/// Dense 2-D filtering of every channel; rounds once at the end.
Patch convolve_2d(const Patch& src, const Kernel2d& kernel);

}  // namespace histaug::detail
