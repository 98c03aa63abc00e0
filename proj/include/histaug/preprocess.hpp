// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>

#include "histaug/image.hpp"
#include "histaug/remap.hpp"

namespace histaug {

inline constexpr int kCropSize = 60;
inline constexpr int kModelInputSize = 224;
inline constexpr std::array<double, 3> kImageNetMean = {0.485, 0.456, 0.406};
inline constexpr std::array<double, 3> kImageNetStd = {0.229, 0.224, 0.225};

/// Top-left offset of a centered window; odd remainders round toward the
/// top-left.
constexpr int center_offset(int extent, int size) { return (extent - size) / 2; }

/// size x size window centered in `src`.
Patch center_crop(const Patch& src, int size);

/// Resamples to the target extent. Bilinear sampling aligns pixel centers:
/// src = (dst + 0.5) * (src_extent / dst_extent) - 0.5, clamped to the edge.
Patch resize(const Patch& src, int target_width, int target_height,
             Interpolation interpolation = Interpolation::bilinear);

/// (pixel / 255 - mean_c) / std_c per channel, written channel-planar.
/// Requires a 224x224 input.
NormalizedTensor normalize_imagenet(const Patch& src);

/// Crop 60, bilinear resize to 224, ImageNet normalization.
NormalizedTensor final_preprocess(const Patch& src);

}  // namespace histaug
