// SPDX-License-Identifier: Apache-2.0
#include "histaug/remap.hpp"

#include <cmath>

namespace histaug {

DisplacementField::DisplacementField(int width, int height)
    : width_(width), height_(height) {
  if (width < 1 || height < 1) throw ShapeError("displacement field extent must be positive");
  const auto n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  dx_.assign(n, 0.0);
  dy_.assign(n, 0.0);
}

DisplacementField::DisplacementField(int width, int height, std::vector<double> dx,
                                     std::vector<double> dy)
    : width_(width), height_(height), dx_(std::move(dx)), dy_(std::move(dy)) {
  if (width < 1 || height < 1) throw ShapeError("displacement field extent must be positive");
  const auto n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (dx_.size() != n || dy_.size() != n) {
    throw ShapeError("displacement field components do not match the field extent");
  }
}

bool DisplacementField::all_finite() const noexcept {
  for (std::size_t i = 0; i < dx_.size(); ++i) {
    if (!std::isfinite(dx_[i]) || !std::isfinite(dy_[i])) return false;
  }
  return true;
}

namespace {

// Fetches one pixel, resolving out-of-range coordinates through the border.
// Returns false when the constant border supplies the value.
inline bool fetch(const Patch& src, int x, int y, BorderMode border, int& rx, int& ry) {
  const bool inside = x >= 0 && y >= 0 && x < src.width() && y < src.height();
  if (inside) {
    rx = x;
    ry = y;
    return true;
  }
  if (border.kind == BorderMode::Kind::constant) return false;
  rx = reflect_index(x, src.width());
  ry = reflect_index(y, src.height());
  return true;
}

// Coordinates this far outside the raster are clamped before the integer cast;
// any reflected position repeats with period 2*(n-1), so nothing is lost.
inline double clamp_coord(double v) {
  constexpr double kLimit = 1 << 28;
  return std::fmin(std::fmax(v, -kLimit), kLimit);
}

}  // namespace

std::array<double, 3> sample(const Patch& src, double x, double y, Interpolation interpolation,
                             BorderMode border) {
  std::array<double, 3> out{};
  x = clamp_coord(x);
  y = clamp_coord(y);
  int rx = 0;
  int ry = 0;
  if (interpolation == Interpolation::nearest) {
    const int ix = static_cast<int>(std::floor(x + 0.5));
    const int iy = static_cast<int>(std::floor(y + 0.5));
    if (fetch(src, ix, iy, border, rx, ry)) {
      for (int c = 0; c < 3; ++c) out[c] = src.at(rx, ry, c);
    } else {
      out.fill(border.value);
    }
    return out;
  }

  const double fx0 = std::floor(x);
  const double fy0 = std::floor(y);
  const int x0 = static_cast<int>(fx0);
  const int y0 = static_cast<int>(fy0);
  const double ax = x - fx0;
  const double ay = y - fy0;
  const double weights[4] = {(1.0 - ax) * (1.0 - ay), ax * (1.0 - ay), (1.0 - ax) * ay, ax * ay};
  const int offsets[4][2] = {{0, 0}, {1, 0}, {0, 1}, {1, 1}};
  for (int k = 0; k < 4; ++k) {
    if (weights[k] == 0.0) continue;
    if (fetch(src, x0 + offsets[k][0], y0 + offsets[k][1], border, rx, ry)) {
      for (int c = 0; c < 3; ++c) out[c] += weights[k] * src.at(rx, ry, c);
    } else {
      for (int c = 0; c < 3; ++c) out[c] += weights[k] * border.value;
    }
  }
  return out;
}

Patch remap(const Patch& src, const DisplacementField& field, Interpolation interpolation,
            BorderMode border) {
  Patch out(field.width(), field.height());
  for (int y = 0; y < field.height(); ++y) {
    for (int x = 0; x < field.width(); ++x) {
      const auto v = sample(src, x + field.dx(x, y), y + field.dy(x, y), interpolation, border);
      out.set_pixel(x, y, to_u8(v[0]), to_u8(v[1]), to_u8(v[2]));
    }
  }
  return out;
}

DisplacementField affine_field(int width, int height, const AffineMatrix& m) {
  DisplacementField field(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      field.dx(x, y) = m[0] * x + m[1] * y + m[2] - x;
      field.dy(x, y) = m[3] * x + m[4] * y + m[5] - y;
    }
  }
  return field;
}

}  // namespace histaug
