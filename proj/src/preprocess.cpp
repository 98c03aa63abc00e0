// SPDX-License-Identifier: Apache-2.0
#include "histaug/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace histaug {

Patch center_crop(const Patch& src, int size) {
  if (size < 1) throw ParameterError("crop size must be at least 1");
  if (size > src.width() || size > src.height()) {
    throw ShapeError("crop size " + std::to_string(size) + " exceeds patch extent " +
                     std::to_string(src.width()) + "x" + std::to_string(src.height()));
  }
  const int ox = center_offset(src.width(), size);
  const int oy = center_offset(src.height(), size);
  Patch out(size, size);
  for (int y = 0; y < size; ++y) {
    const auto row = src.data().subspan(
        (static_cast<std::size_t>(oy + y) * src.width() + ox) * Patch::kChannels,
        static_cast<std::size_t>(size) * Patch::kChannels);
    std::copy(row.begin(), row.end(),
              out.data().begin() + static_cast<std::ptrdiff_t>(y) * size * Patch::kChannels);
  }
  return out;
}

Patch resize(const Patch& src, int target_width, int target_height, Interpolation interpolation) {
  if (target_width < 1 || target_height < 1) {
    throw ParameterError("resize target extent must be at least 1x1");
  }
  const double scale_x = static_cast<double>(src.width()) / target_width;
  const double scale_y = static_cast<double>(src.height()) / target_height;
  Patch out(target_width, target_height);

  if (interpolation == Interpolation::nearest) {
    for (int y = 0; y < target_height; ++y) {
      const int sy = std::min(static_cast<int>(std::floor((y + 0.5) * scale_y)), src.height() - 1);
      for (int x = 0; x < target_width; ++x) {
        const int sx = std::min(static_cast<int>(std::floor((x + 0.5) * scale_x)), src.width() - 1);
        out.set_pixel(x, y, src.at(sx, sy, 0), src.at(sx, sy, 1), src.at(sx, sy, 2));
      }
    }
    return out;
  }

  const double max_x = src.width() - 1;
  const double max_y = src.height() - 1;
  for (int y = 0; y < target_height; ++y) {
    const double sy = std::clamp((y + 0.5) * scale_y - 0.5, 0.0, max_y);
    for (int x = 0; x < target_width; ++x) {
      const double sx = std::clamp((x + 0.5) * scale_x - 0.5, 0.0, max_x);
      const auto v = sample(src, sx, sy, Interpolation::bilinear, BorderMode::reflect());
      out.set_pixel(x, y, to_u8(v[0]), to_u8(v[1]), to_u8(v[2]));
    }
  }
  return out;
}

NormalizedTensor normalize_imagenet(const Patch& src) {
  if (src.width() != kModelInputSize || src.height() != kModelInputSize) {
    throw ShapeError("normalization expects a 224x224 patch, got " + std::to_string(src.width()) +
                     "x" + std::to_string(src.height()));
  }
  NormalizedTensor out(3, kModelInputSize, kModelInputSize);
  for (int y = 0; y < kModelInputSize; ++y) {
    for (int x = 0; x < kModelInputSize; ++x) {
      for (int c = 0; c < 3; ++c) {
        out.at(c, y, x) = static_cast<float>((src.at(x, y, c) / 255.0 - kImageNetMean[c]) /
                                             kImageNetStd[c]);
      }
    }
  }
  return out;
}

NormalizedTensor final_preprocess(const Patch& src) {
  return normalize_imagenet(
      resize(center_crop(src, kCropSize), kModelInputSize, kModelInputSize));
}

}  // namespace histaug
