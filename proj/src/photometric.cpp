// SPDX-License-Identifier: Apache-2.0
#include "histaug/photometric.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "color.hpp"

namespace histaug {
namespace {

void require_in(double v, double lo, double hi, const char* name) {
  if (!(v >= lo && v <= hi)) {
    throw ParameterError(std::string(name) + " = " + std::to_string(v) + " outside [" +
                         std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
}

double clamp255(double v) { return std::clamp(v, 0.0, 255.0); }

// Float working copy of a patch for multi-step color operations.
struct FloatImage {
  int width;
  int height;
  std::vector<double> v;

  explicit FloatImage(const Patch& p)
      : width(p.width()), height(p.height()), v(p.data().begin(), p.data().end()) {}

  Patch to_patch() const {
    Patch out(width, height);
    auto d = out.data();
    for (std::size_t i = 0; i < v.size(); ++i) d[i] = to_u8(v[i]);
    return out;
  }

  std::size_t pixels() const { return v.size() / 3; }
};

void apply_jitter_op(FloatImage& img, JitterOp op, const ColorJitterFactors& f) {
  switch (op) {
    case JitterOp::brightness:
      for (double& x : img.v) x = clamp255(x * f.brightness);
      break;
    case JitterOp::contrast: {
      double mean = 0.0;
      for (std::size_t i = 0; i < img.pixels(); ++i) {
        mean += detail::luma(img.v[3 * i], img.v[3 * i + 1], img.v[3 * i + 2]);
      }
      mean /= static_cast<double>(img.pixels());
      for (double& x : img.v) x = clamp255(f.contrast * x + (1.0 - f.contrast) * mean);
      break;
    }
    case JitterOp::saturation:
      for (std::size_t i = 0; i < img.pixels(); ++i) {
        double* px = &img.v[3 * i];
        const double g = detail::luma(px[0], px[1], px[2]);
        for (int c = 0; c < 3; ++c) px[c] = clamp255(f.saturation * px[c] + (1.0 - f.saturation) * g);
      }
      break;
    case JitterOp::hue:
      if (f.hue == 0.0) break;
      for (std::size_t i = 0; i < img.pixels(); ++i) {
        double* px = &img.v[3 * i];
        auto hsv = detail::rgb_to_hsv({px[0], px[1], px[2]});
        hsv.h = detail::wrap_degrees(hsv.h + f.hue * 360.0);
        const auto rgb = detail::hsv_to_rgb(hsv);
        px[0] = clamp255(rgb.r);
        px[1] = clamp255(rgb.g);
        px[2] = clamp255(rgb.b);
      }
      break;
  }
}

}  // namespace

JitterOrder jitter_order(int index) {
  if (index < 0 || index >= 24) throw ParameterError("jitter order index must lie in [0, 24)");
  std::array<int, 4> perm = {0, 1, 2, 3};
  for (int i = 0; i < index; ++i) std::next_permutation(perm.begin(), perm.end());
  JitterOrder out{};
  for (int i = 0; i < 4; ++i) out[i] = static_cast<JitterOp>(perm[i]);
  return out;
}

Patch color_jitter(const Patch& src, const ColorJitterFactors& f, const JitterOrder& order,
                   const ColorJitterParams& r) {
  require_in(f.brightness, r.brightness[0], r.brightness[1], "color_jitter.brightness");
  require_in(f.contrast, r.contrast[0], r.contrast[1], "color_jitter.contrast");
  require_in(f.saturation, r.saturation[0], r.saturation[1], "color_jitter.saturation");
  require_in(f.hue, r.hue[0], r.hue[1], "color_jitter.hue");
  FloatImage img(src);
  for (JitterOp op : order) apply_jitter_op(img, op, f);
  return img.to_patch();
}

Patch hsv_shift(const Patch& src, const HsvShift& s, const HsvShiftLimits& limits) {
  require_in(s.hue, -limits.hue, limits.hue, "hue_saturation_value.hue");
  require_in(s.saturation, -limits.saturation, limits.saturation,
             "hue_saturation_value.saturation");
  require_in(s.value, -limits.value, limits.value, "hue_saturation_value.value");
  Patch out(src.width(), src.height());
  const auto in = src.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < in.size(); i += 3) {
    auto hsv = detail::rgb_to_hsv({double(in[i]), double(in[i + 1]), double(in[i + 2])});
    hsv.h = detail::wrap_degrees(hsv.h + 2.0 * s.hue);
    hsv.s = std::clamp(hsv.s * 255.0 + s.saturation, 0.0, 255.0) / 255.0;
    hsv.v = std::clamp(hsv.v + s.value, 0.0, 255.0);
    const auto rgb = detail::hsv_to_rgb(hsv);
    dst[i] = to_u8(rgb.r);
    dst[i + 1] = to_u8(rgb.g);
    dst[i + 2] = to_u8(rgb.b);
  }
  return out;
}

Patch brightness_contrast(const Patch& src, double brightness_delta, double contrast_delta,
                          double limit) {
  require_in(brightness_delta, -limit, limit, "brightness_contrast.brightness");
  require_in(contrast_delta, -limit, limit, "brightness_contrast.contrast");
  std::array<std::uint8_t, 256> lut{};
  for (int v = 0; v < 256; ++v) {
    lut[v] = to_u8((v - 128.0) * (1.0 + contrast_delta) + 128.0 + 255.0 * brightness_delta);
  }
  Patch out = src;
  for (auto& px : out.data()) px = lut[px];
  return out;
}

std::vector<double> clahe_lut(std::span<const double> histogram, double clip_limit, double lo,
                              double hi) {
  if (histogram.empty()) throw ParameterError("clahe histogram must have at least one bin");
  if (!(clip_limit > 0.0)) throw ParameterError("clahe.clip_limit must be positive");
  const auto bins = static_cast<double>(histogram.size());
  const double total = std::accumulate(histogram.begin(), histogram.end(), 0.0);
  std::vector<double> lut(histogram.size(), lo);
  if (total <= 0.0) return lut;

  const double clip = clip_limit * total / bins;
  double excess = 0.0;
  std::vector<double> clipped(histogram.begin(), histogram.end());
  for (double& h : clipped) {
    if (h > clip) {
      excess += h - clip;
      h = clip;
    }
  }
  const double share = excess / bins;
  double cdf = 0.0;
  for (std::size_t b = 0; b < clipped.size(); ++b) {
    cdf += clipped[b] + share;
    lut[b] = lo + (hi - lo) * cdf / total;
  }
  return lut;
}

Patch clahe(const Patch& src, const ClaheParams& p) {
  if (!(p.clip_limit > 0.0)) throw ParameterError("clahe.clip_limit must be positive");
  if (p.tiles_x < 1 || p.tiles_y < 1) throw ParameterError("clahe tile grid must be at least 1x1");
  const int w = src.width();
  const int h = src.height();
  if (w < p.tiles_x || h < p.tiles_y) {
    throw ShapeError("patch " + std::to_string(w) + "x" + std::to_string(h) +
                     " is smaller than the CLAHE tile grid");
  }

  std::vector<double> luma(static_cast<std::size_t>(w) * h);
  std::vector<std::uint8_t> level(luma.size());
  std::uint8_t lo = 255;
  std::uint8_t hi = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      luma[i] = detail::luma(src.at(x, y, 0), src.at(x, y, 1), src.at(x, y, 2));
      level[i] = to_u8(luma[i]);
      lo = std::min(lo, level[i]);
      hi = std::max(hi, level[i]);
    }
  }

  const auto edge = [](int t, int tiles, int extent) { return t * extent / tiles; };
  std::vector<std::vector<double>> luts(static_cast<std::size_t>(p.tiles_x) * p.tiles_y);
  for (int ty = 0; ty < p.tiles_y; ++ty) {
    for (int tx = 0; tx < p.tiles_x; ++tx) {
      std::vector<double> hist(256, 0.0);
      for (int y = edge(ty, p.tiles_y, h); y < edge(ty + 1, p.tiles_y, h); ++y) {
        for (int x = edge(tx, p.tiles_x, w); x < edge(tx + 1, p.tiles_x, w); ++x) {
          hist[level[static_cast<std::size_t>(y) * w + x]] += 1.0;
        }
      }
      luts[static_cast<std::size_t>(ty) * p.tiles_x + tx] = clahe_lut(hist, p.clip_limit, lo, hi);
    }
  }

  // Tile-space coordinate of a pixel centre; tile t's centre sits at t.
  const auto locate = [](int i, int tiles, int extent, int& t0, int& t1, double& frac) {
    const double f = (i + 0.5) * tiles / extent - 0.5;
    if (f <= 0.0) {
      t0 = t1 = 0;
      frac = 0.0;
    } else if (f >= tiles - 1) {
      t0 = t1 = tiles - 1;
      frac = 0.0;
    } else {
      t0 = static_cast<int>(std::floor(f));
      t1 = t0 + 1;
      frac = f - t0;
    }
  };

  Patch out(w, h);
  for (int y = 0; y < h; ++y) {
    int ty0, ty1;
    double fy;
    locate(y, p.tiles_y, h, ty0, ty1, fy);
    for (int x = 0; x < w; ++x) {
      int tx0, tx1;
      double fx;
      locate(x, p.tiles_x, w, tx0, tx1, fx);
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      const auto lv = level[i];
      const auto lut = [&](int tx, int ty) {
        return luts[static_cast<std::size_t>(ty) * p.tiles_x + tx][lv];
      };
      const double mapped = (1.0 - fy) * ((1.0 - fx) * lut(tx0, ty0) + fx * lut(tx1, ty0)) +
                            fy * ((1.0 - fx) * lut(tx0, ty1) + fx * lut(tx1, ty1));
      const double delta = mapped - lv;
      out.set_pixel(x, y, to_u8(src.at(x, y, 0) + delta), to_u8(src.at(x, y, 1) + delta),
                    to_u8(src.at(x, y, 2) + delta));
    }
  }
  return out;
}

Patch rgb_shift(const Patch& src, const std::array<int, 3>& shifts, int limit) {
  for (int c = 0; c < 3; ++c) require_in(shifts[c], -limit, limit, "rgb_shift.shift");
  Patch out = src;
  auto d = out.data();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = to_u8(d[i] + shifts[i % 3]);
  return out;
}

Patch channel_shuffle(const Patch& src, const ChannelPermutation& perm) {
  std::array<bool, 3> seen{};
  for (int c : perm) {
    if (c < 0 || c > 2 || seen[c]) throw ParameterError("channel_shuffle needs a permutation of 0,1,2");
    seen[c] = true;
  }
  Patch out(src.width(), src.height());
  const auto in = src.data();
  auto d = out.data();
  for (std::size_t i = 0; i < in.size(); i += 3) {
    for (int c = 0; c < 3; ++c) d[i + c] = in[i + perm[c]];
  }
  return out;
}

Patch to_grayscale(const Patch& src) {
  Patch out(src.width(), src.height());
  const auto in = src.data();
  auto d = out.data();
  for (std::size_t i = 0; i < in.size(); i += 3) {
    const auto g = to_u8(detail::luma(in[i], in[i + 1], in[i + 2]));
    d[i] = d[i + 1] = d[i + 2] = g;
  }
  return out;
}

}  // namespace histaug
