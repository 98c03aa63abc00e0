// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "histaug/image.hpp"

namespace histaug {

enum class Interpolation { nearest, bilinear };

/// Out-of-bounds policy for sampling. `reflect` mirrors about the edge pixel
/// without repeating it (…, 2, 1 | 0, 1, 2, … ).
struct BorderMode {
  enum class Kind { reflect, constant };
  Kind kind = Kind::reflect;
  std::uint8_t value = 0;

  static constexpr BorderMode reflect() { return {Kind::reflect, 0}; }
  static constexpr BorderMode constant(std::uint8_t v) { return {Kind::constant, v}; }
};

/// Maps any integer coordinate into [0, n) by mirror reflection without edge
/// duplication. Valid for arbitrarily distant coordinates.
inline int reflect_index(int i, int n) noexcept {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  int m = i % period;
  if (m < 0) m += period;
  return m < n ? m : period - m;
}

/// Per-pixel source offsets for an output raster of extent width x height.
/// Output pixel (x, y) samples the source at (x + dx, y + dy).
class DisplacementField {
 public:
  DisplacementField(int width, int height);
  DisplacementField(int width, int height, std::vector<double> dx, std::vector<double> dy);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }

  double dx(int x, int y) const noexcept { return dx_[index(x, y)]; }
  double dy(int x, int y) const noexcept { return dy_[index(x, y)]; }
  double& dx(int x, int y) noexcept { return dx_[index(x, y)]; }
  double& dy(int x, int y) noexcept { return dy_[index(x, y)]; }

  std::span<const double> dx_values() const noexcept { return dx_; }
  std::span<const double> dy_values() const noexcept { return dy_; }

  bool all_finite() const noexcept;

 private:
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_;
  int height_;
  std::vector<double> dx_;
  std::vector<double> dy_;
};

/// Samples all three channels of `src` at a real-valued position.
std::array<double, 3> sample(const Patch& src, double x, double y, Interpolation interpolation,
                             BorderMode border);

/// Resamples `src` through a displacement field. The output has the field's
/// extent.
Patch remap(const Patch& src, const DisplacementField& field,
            Interpolation interpolation = Interpolation::bilinear,
            BorderMode border = BorderMode::reflect());

/// 2x3 matrix mapping output coordinates to source coordinates:
/// src = (m[0]*x + m[1]*y + m[2], m[3]*x + m[4]*y + m[5]).
using AffineMatrix = std::array<double, 6>;

/// Builds the displacement field of an output-to-source affine map.
DisplacementField affine_field(int width, int height, const AffineMatrix& out_to_src);

}  // namespace histaug
