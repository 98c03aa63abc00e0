// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <vector>

#include "histaug/image.hpp"
#include "histaug/rng.hpp"

namespace histaug {

/// Sampling ranges of the blur and noise group.
struct BlurParams {
  std::array<int, 2> gaussian_kernel{1, 5};  // odd sizes only
  std::array<int, 2> defocus_radius{1, 4};
  std::array<double, 2> defocus_alias_blur{0.1, 0.3};
  std::array<int, 2> motion_kernel{3, 5};
};

struct NoiseParams {
  std::array<double, 2> gauss_std{10.0, 50.0};  // 0..255 scale, mean 0
  std::array<double, 2> iso_color_shift{0.01, 0.05};
  std::array<double, 2> iso_intensity{0.1, 0.4};
  std::array<double, 2> multiplier{0.95, 1.05};
};

/// Square filter kernel, row-major, anchored at ((side-1)/2, (side-1)/2).
struct BlurKernel {
  int side = 1;
  std::vector<double> taps{1.0};

  double at(int x, int y) const { return taps[static_cast<std::size_t>(y) * side + x]; }
  double sum() const;
};

/// sigma = 0.3 * ((kernel - 1) / 2 - 1) + 0.8
double gaussian_sigma_for_kernel(int kernel);
/// Normalized 1-D Gaussian taps for an odd kernel size.
std::vector<double> gaussian_kernel_1d(int kernel);
/// Disc of radius `radius` smoothed by a Gaussian of std `alias_blur`, then
/// normalized; side 2*radius+1.
BlurKernel defocus_kernel(int radius, double alias_blur);
/// Rasterized line of `kernel` taps through the centre at `angle_deg`.
BlurKernel motion_kernel(int kernel, double angle_deg);

/// Separable Gaussian blur with a mirrored border. Kernel must be odd, <= 5.
Patch gaussian_blur(const Patch& src, int kernel);
Patch defocus(const Patch& src, int radius, double alias_blur);
Patch motion_blur(const Patch& src, int kernel, double angle_deg);
/// Draws the angle uniformly on [0, 360) from `rng`.
Patch motion_blur(const Patch& src, int kernel, RngStream& rng);

/// Independent N(0, std^2) per pixel and channel, drawn in raster order.
Patch gauss_noise(const Patch& src, double std, RngStream& rng);

/// Hue jitter with std color_shift*180 on the 0..180 hue scale, then additive
/// luma noise with std intensity*sqrt(luma) applied equally to all channels.
/// Draw order: all hue variates in raster order, then all luma variates.
Patch iso_noise(const Patch& src, double color_shift, double intensity, RngStream& rng);

/// One multiplier for the whole image: out = round(m * pixel), clamped.
Patch multiplicative_noise(const Patch& src, double multiplier);
Patch multiplicative_noise(const Patch& src, const std::array<double, 2>& range,
                           RngStream& rng);

}  // namespace histaug
