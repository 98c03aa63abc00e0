// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "histaug/error.hpp"

namespace histaug {

/// Converts a floating-point intensity to 8 bits: round half away from zero,
/// then clamp to [0, 255]. Every transform stores pixels through this.
inline std::uint8_t to_u8(double v) {
  const double r = std::round(v);
  if (!(r > 0.0)) return 0;  // also catches NaN
  if (r >= 255.0) return 255;
  return static_cast<std::uint8_t>(r);
}

/// 8-bit interleaved RGB raster, row-major.
class Patch {
 public:
  static constexpr int kChannels = 3;

  Patch(int width, int height, std::uint8_t fill = 0)
      : width_(width), height_(height) {
    check_extent(width, height);
    data_.assign(size(), fill);
  }

  Patch(int width, int height, std::vector<std::uint8_t> data)
      : width_(width), height_(height), data_(std::move(data)) {
    check_extent(width, height);
    if (data_.size() != size()) {
      throw ShapeError("patch data length does not match width*height*3");
    }
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_) * kChannels;
  }

  std::uint8_t at(int x, int y, int c) const noexcept { return data_[index(x, y, c)]; }
  std::uint8_t& at(int x, int y, int c) noexcept { return data_[index(x, y, c)]; }

  std::span<const std::uint8_t> data() const noexcept { return data_; }
  std::span<std::uint8_t> data() noexcept { return data_; }

  void set_pixel(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) noexcept {
    const std::size_t i = index(x, y, 0);
    data_[i] = r;
    data_[i + 1] = g;
    data_[i + 2] = b;
  }

  bool same_extent(const Patch& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_;
  }

  friend bool operator==(const Patch&, const Patch&) = default;

 private:
  static void check_extent(int width, int height) {
    if (width < 1 || height < 1) throw ShapeError("patch extent must be at least 1x1");
  }

  std::size_t index(int x, int y, int c) const noexcept {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
            static_cast<std::size_t>(x)) * kChannels +
           static_cast<std::size_t>(c);
  }

  int width_;
  int height_;
  std::vector<std::uint8_t> data_;
};

/// Three-plane float raster, channel-planar (CHW).
class NormalizedTensor {
 public:
  NormalizedTensor(int channels, int height, int width)
      : channels_(channels), height_(height), width_(width) {
    if (channels < 1 || height < 1 || width < 1) throw ShapeError("tensor extent must be positive");
    values_.assign(static_cast<std::size_t>(channels) * height * width, 0.0f);
  }

  NormalizedTensor(int channels, int height, int width, std::vector<float> values)
      : channels_(channels), height_(height), width_(width), values_(std::move(values)) {
    if (channels < 1 || height < 1 || width < 1) throw ShapeError("tensor extent must be positive");
    if (values_.size() != static_cast<std::size_t>(channels) * height * width) {
      throw ShapeError("tensor value count does not match C*H*W");
    }
  }

  int channels() const noexcept { return channels_; }
  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }

  float at(int c, int y, int x) const noexcept { return values_[index(c, y, x)]; }
  float& at(int c, int y, int x) noexcept { return values_[index(c, y, x)]; }

  std::span<const float> values() const noexcept { return values_; }

  bool all_finite() const noexcept {
    return std::all_of(values_.begin(), values_.end(), [](float v) { return std::isfinite(v); });
  }

  friend bool operator==(const NormalizedTensor&, const NormalizedTensor&) = default;

 private:
  std::size_t index(int c, int y, int x) const noexcept {
    return (static_cast<std::size_t>(c) * height_ + static_cast<std::size_t>(y)) * width_ +
           static_cast<std::size_t>(x);
  }

  int channels_;
  int height_;
  int width_;
  std::vector<float> values_;
};

}  // namespace histaug
