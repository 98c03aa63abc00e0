// SPDX-License-Identifier: Apache-2.0
#include "filter.hpp"

#include <cmath>
#include <numeric>

#include "histaug/remap.hpp"

namespace histaug::detail {

std::vector<double> gaussian_taps(double sigma, int radius) {
  std::vector<double> taps(static_cast<std::size_t>(2 * radius + 1));
  for (int i = -radius; i <= radius; ++i) {
    taps[static_cast<std::size_t>(i + radius)] = std::exp(-(i * i) / (2.0 * sigma * sigma));
  }
  const double sum = std::accumulate(taps.begin(), taps.end(), 0.0);
  for (double& t : taps) t /= sum;
  return taps;
}

std::vector<double> convolve_plane_separable(const std::vector<double>& plane, int width,
                                             int height, const std::vector<double>& taps) {
  const int radius = static_cast<int>(taps.size() / 2);
  std::vector<double> tmp(plane.size(), 0.0);
  std::vector<double> out(plane.size(), 0.0);
  for (int y = 0; y < height; ++y) {
    const std::size_t row = static_cast<std::size_t>(y) * width;
    for (int x = 0; x < width; ++x) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        acc += taps[static_cast<std::size_t>(k + radius)] * plane[row + reflect_index(x + k, width)];
      }
      tmp[row + x] = acc;
    }
  }
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        acc += taps[static_cast<std::size_t>(k + radius)] *
               tmp[static_cast<std::size_t>(reflect_index(y + k, height)) * width + x];
      }
      out[static_cast<std::size_t>(y) * width + x] = acc;
    }
  }
  return out;
}

Patch convolve_separable(const Patch& src, const std::vector<double>& taps) {
  if (taps.size() == 1 && taps[0] == 1.0) return src;
  const int w = src.width();
  const int h = src.height();
  Patch out(w, h);
  std::vector<double> plane(static_cast<std::size_t>(w) * h);
  for (int c = 0; c < 3; ++c) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) plane[static_cast<std::size_t>(y) * w + x] = src.at(x, y, c);
    }
    const auto filtered = convolve_plane_separable(plane, w, h, taps);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        out.at(x, y, c) = to_u8(filtered[static_cast<std::size_t>(y) * w + x]);
      }
    }
  }
  return out;
}

Patch convolve_2d(const Patch& src, const Kernel2d& kernel) {
  const int w = src.width();
  const int h = src.height();
  const int anchor = (kernel.side - 1) / 2;
  Patch out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc[3] = {0.0, 0.0, 0.0};
      for (int ky = 0; ky < kernel.side; ++ky) {
        const int sy = reflect_index(y + ky - anchor, h);
        for (int kx = 0; kx < kernel.side; ++kx) {
          const double t = kernel.at(kx, ky);
          if (t == 0.0) continue;
          const int sx = reflect_index(x + kx - anchor, w);
          for (int c = 0; c < 3; ++c) acc[c] += t * src.at(sx, sy, c);
        }
      }
      out.set_pixel(x, y, to_u8(acc[0]), to_u8(acc[1]), to_u8(acc[2]));
    }
  }
  return out;
}

}  // namespace histaug::detail
