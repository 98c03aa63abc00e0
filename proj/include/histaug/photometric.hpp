// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <span>
#include <vector>

#include "histaug/image.hpp"

namespace histaug {

/// Sampling ranges for ColorJitter. Brightness, contrast and saturation are
/// multiplicative factors; hue is a fraction of the hue circle.
struct ColorJitterParams {
  std::array<double, 2> brightness{0.8, 1.2};
  std::array<double, 2> contrast{0.8, 1.2};
  std::array<double, 2> saturation{0.85, 1.15};
  std::array<double, 2> hue{-0.08, 0.08};
};

struct ColorJitterFactors {
  double brightness = 1.0;
  double contrast = 1.0;
  double saturation = 1.0;
  double hue = 0.0;
};

enum class JitterOp { brightness = 0, contrast = 1, saturation = 2, hue = 3 };
using JitterOrder = std::array<JitterOp, 4>;

inline constexpr JitterOrder kDefaultJitterOrder = {JitterOp::brightness, JitterOp::contrast,
                                                    JitterOp::saturation, JitterOp::hue};

/// The k-th (0..23) permutation of the four sub-operations in lexicographic
/// order.
JitterOrder jitter_order(int index);

/// Applies the four sub-operations in `order`. Intermediate values stay in
/// floating point (clamped to [0, 255] after each step) and are rounded once.
Patch color_jitter(const Patch& src, const ColorJitterFactors& factors,
                   const JitterOrder& order = kDefaultJitterOrder,
                   const ColorJitterParams& ranges = {});

/// Shifts on 8-bit HSV scales: hue in 0..180 units (one unit is 2 degrees),
/// saturation and value in 0..255 units.
struct HsvShift {
  int hue = 0;
  int saturation = 0;
  int value = 0;
};

struct HsvShiftLimits {
  int hue = 15;
  int saturation = 20;
  int value = 15;
};

/// Hue wraps, saturation and value clamp. The HSV representation is kept
/// unquantized, so zero shifts reproduce every 8-bit input exactly.
Patch hsv_shift(const Patch& src, const HsvShift& shift, const HsvShiftLimits& limits = {});

/// out = (p - 128) * (1 + contrast_delta) + 128 + 255 * brightness_delta
Patch brightness_contrast(const Patch& src, double brightness_delta, double contrast_delta,
                          double limit = 0.2);

struct ClaheParams {
  double clip_limit = 2.0;  // multiple of the mean bin height
  int tiles_x = 4;
  int tiles_y = 4;
};

/// Lookup table of one tile: the histogram is clipped at clip_limit times its
/// mean bin height, the excess is spread evenly over all bins in one pass,
/// and the cumulative histogram is rescaled onto [lo, hi].
std::vector<double> clahe_lut(std::span<const double> histogram, double clip_limit, double lo,
                              double hi);

/// Equalizes the luma plane tile by tile and blends neighbouring tile
/// mappings bilinearly. The mappings target the patch's own luma range, so a
/// uniform patch is a fixed point. The luma change is added to every channel,
/// leaving chroma as it was.
Patch clahe(const Patch& src, const ClaheParams& params = {});

Patch rgb_shift(const Patch& src, const std::array<int, 3>& shifts, int limit = 20);

/// Output channel c takes input channel perm[c].
using ChannelPermutation = std::array<int, 3>;

Patch channel_shuffle(const Patch& src, const ChannelPermutation& perm);

/// round(0.299 R + 0.587 G + 0.114 B) replicated to all channels.
Patch to_grayscale(const Patch& src);

}  // namespace histaug
