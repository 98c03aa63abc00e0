// SPDX-License-Identifier: Apache-2.0
#include "histaug/degradation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <set>
#include <string>
#include <utility>

#include "color.hpp"
#include "filter.hpp"

namespace histaug {
namespace {

detail::Kernel2d as_filter(const BlurKernel& k) { return detail::Kernel2d{k.side, k.taps}; }

void normalize(BlurKernel& k) {
  const double s = k.sum();
  for (double& t : k.taps) t /= s;
}

}  // namespace

double BlurKernel::sum() const { return std::accumulate(taps.begin(), taps.end(), 0.0); }

double gaussian_sigma_for_kernel(int kernel) { return 0.3 * ((kernel - 1) * 0.5 - 1.0) + 0.8; }

std::vector<double> gaussian_kernel_1d(int kernel) {
  if (kernel < 1 || kernel % 2 == 0) {
    throw ParameterError("gaussian_blur kernel must be odd, got " + std::to_string(kernel));
  }
  if (kernel == 1) return {1.0};
  return detail::gaussian_taps(gaussian_sigma_for_kernel(kernel), kernel / 2);
}

BlurKernel defocus_kernel(int radius, double alias_blur) {
  if (radius < 1) throw ParameterError("defocus.radius must be at least 1");
  if (!(alias_blur > 0.0)) throw ParameterError("defocus.alias_blur must be positive");
  const int side = 2 * radius + 1;
  std::vector<double> disc(static_cast<std::size_t>(side) * side, 0.0);
  for (int y = -radius; y <= radius; ++y) {
    for (int x = -radius; x <= radius; ++x) {
      if (x * x + y * y <= radius * radius) {
        disc[static_cast<std::size_t>(y + radius) * side + (x + radius)] = 1.0;
      }
    }
  }
  // Smooth the disc edge; taps beyond the kernel support are dropped and the
  // result renormalized.
  const int gr = std::max(1, static_cast<int>(std::ceil(3.0 * alias_blur)));
  const auto g = detail::gaussian_taps(alias_blur, gr);
  BlurKernel out;
  out.side = side;
  out.taps.assign(disc.size(), 0.0);
  for (int y = 0; y < side; ++y) {
    for (int x = 0; x < side; ++x) {
      double acc = 0.0;
      for (int j = -gr; j <= gr; ++j) {
        for (int i = -gr; i <= gr; ++i) {
          const int sx = x + i;
          const int sy = y + j;
          if (sx < 0 || sy < 0 || sx >= side || sy >= side) continue;
          acc += g[i + gr] * g[j + gr] * disc[static_cast<std::size_t>(sy) * side + sx];
        }
      }
      out.taps[static_cast<std::size_t>(y) * side + x] = acc;
    }
  }
  normalize(out);
  return out;
}

BlurKernel motion_kernel(int kernel, double angle_deg) {
  if (kernel < 3) throw ParameterError("motion_blur kernel must be at least 3");
  const double centre = (kernel - 1) / 2.0;
  const double a = angle_deg * std::numbers::pi / 180.0;
  const double ux = std::cos(a);
  const double uy = -std::sin(a);  // y grows downward
  BlurKernel out;
  out.side = kernel;
  out.taps.assign(static_cast<std::size_t>(kernel) * kernel, 0.0);
  std::set<std::pair<int, int>> cells;
  for (int i = 0; i < kernel; ++i) {
    const double t = i - centre;
    const int x = static_cast<int>(std::lround(centre + t * ux));
    const int y = static_cast<int>(std::lround(centre + t * uy));
    cells.insert({std::clamp(x, 0, kernel - 1), std::clamp(y, 0, kernel - 1)});
  }
  for (const auto& [x, y] : cells) out.taps[static_cast<std::size_t>(y) * kernel + x] = 1.0;
  normalize(out);
  return out;
}

Patch gaussian_blur(const Patch& src, int kernel) {
  if (kernel > 5) throw ParameterError("gaussian_blur kernel must be at most 5");
  return detail::convolve_separable(src, gaussian_kernel_1d(kernel));
}

Patch defocus(const Patch& src, int radius, double alias_blur) {
  return detail::convolve_2d(src, as_filter(defocus_kernel(radius, alias_blur)));
}

Patch motion_blur(const Patch& src, int kernel, double angle_deg) {
  return detail::convolve_2d(src, as_filter(motion_kernel(kernel, angle_deg)));
}

Patch motion_blur(const Patch& src, int kernel, RngStream& rng) {
  return motion_blur(src, kernel, rng.uniform(0.0, 360.0));
}

Patch gauss_noise(const Patch& src, double std, RngStream& rng) {
  if (!(std >= 0.0)) throw ParameterError("gauss_noise.std must be non-negative");
  Patch out = src;
  for (auto& px : out.data()) px = to_u8(px + std * rng.normal());
  return out;
}

Patch iso_noise(const Patch& src, double color_shift, double intensity, RngStream& rng) {
  if (!(color_shift >= 0.0) || !(intensity >= 0.0)) {
    throw ParameterError("iso_noise parameters must be non-negative");
  }
  const std::size_t n = static_cast<std::size_t>(src.width()) * src.height();
  std::vector<double> hue_noise(n);
  std::vector<double> luma_noise(n);
  for (double& z : hue_noise) z = rng.normal();
  for (double& z : luma_noise) z = rng.normal();

  // 0..180 hue units are 2 degrees each.
  const double hue_std_deg = color_shift * 180.0 * 2.0;
  Patch out(src.width(), src.height());
  const auto in = src.data();
  auto d = out.data();
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t k = 3 * i;
    detail::Rgb rgb{double(in[k]), double(in[k + 1]), double(in[k + 2])};
    if (hue_std_deg > 0.0) {
      auto hsv = detail::rgb_to_hsv(rgb);
      hsv.h = detail::wrap_degrees(hsv.h + hue_std_deg * hue_noise[i]);
      rgb = detail::hsv_to_rgb(hsv);
    }
    const double y = std::max(0.0, detail::luma(rgb.r, rgb.g, rgb.b));
    const double delta = intensity * std::sqrt(y) * luma_noise[i];
    d[k] = to_u8(rgb.r + delta);
    d[k + 1] = to_u8(rgb.g + delta);
    d[k + 2] = to_u8(rgb.b + delta);
  }
  return out;
}

Patch multiplicative_noise(const Patch& src, double multiplier) {
  if (!(multiplier >= 0.0)) throw ParameterError("multiplicative_noise multiplier must be >= 0");
  std::array<std::uint8_t, 256> lut{};
  for (int v = 0; v < 256; ++v) lut[v] = to_u8(multiplier * v);
  Patch out = src;
  for (auto& px : out.data()) px = lut[px];
  return out;
}

Patch multiplicative_noise(const Patch& src, const std::array<double, 2>& range,
                           RngStream& rng) {
  if (!(range[0] <= range[1])) throw ParameterError("multiplicative_noise range is inverted");
  return multiplicative_noise(src, rng.uniform(range[0], range[1]));
}

}  // namespace histaug
