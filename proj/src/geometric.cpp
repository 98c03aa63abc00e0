// SPDX-License-Identifier: Apache-2.0
#include "histaug/geometric.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "filter.hpp"

namespace histaug {
namespace {

double radians(double deg) { return deg * std::numbers::pi / 180.0; }

// Exact cos/sin for multiples of 90 degrees so axis-aligned rotations do not
// pick up 1e-17 residue.
void cos_sin(double deg, double& c, double& s) {
  const double turns = deg / 90.0;
  if (turns == std::floor(turns)) {
    const int q = ((static_cast<int>(turns) % 4) + 4) % 4;
    constexpr double kCos[4] = {1.0, 0.0, -1.0, 0.0};
    constexpr double kSin[4] = {0.0, 1.0, 0.0, -1.0};
    c = kCos[q];
    s = kSin[q];
    return;
  }
  c = std::cos(radians(deg));
  s = std::sin(radians(deg));
}

Patch flip_horizontal(const Patch& src) {
  Patch out(src.width(), src.height());
  for (int y = 0; y < src.height(); ++y) {
    for (int x = 0; x < src.width(); ++x) {
      const int sx = src.width() - 1 - x;
      out.set_pixel(x, y, src.at(sx, y, 0), src.at(sx, y, 1), src.at(sx, y, 2));
    }
  }
  return out;
}

// One counter-clockwise quarter turn: out(x, y) = in(w-1-y, x).
Patch rotate90_ccw(const Patch& src) {
  const int w = src.width();
  Patch out(src.height(), w);
  for (int y = 0; y < out.height(); ++y) {
    for (int x = 0; x < out.width(); ++x) {
      const int sx = w - 1 - y;
      out.set_pixel(x, y, src.at(sx, x, 0), src.at(sx, x, 1), src.at(sx, x, 2));
    }
  }
  return out;
}

void require_in(double v, double lo, double hi, const char* name) {
  if (!(v >= lo && v <= hi)) {
    throw ParameterError(std::string(name) + " = " + std::to_string(v) + " outside [" +
                         std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
}

// Output-to-source affine of a rotation by `angle_deg` (counter-clockwise on
// screen) and uniform `scale` about (cx, cy), followed by translation (tx, ty).
AffineMatrix inverse_similarity(double cx, double cy, double angle_deg, double scale, double tx,
                                double ty) {
  double c = 1.0;
  double s = 0.0;
  cos_sin(angle_deg, c, s);
  // Forward: p' = C + R S (p - C) + t with R = [[c, s], [-s, c]] in y-down
  // coordinates. Inverse: p = C + R^T (p' - C - t) / S.
  const double a = c / scale;
  const double b = -s / scale;
  const double ox = cx + tx;
  const double oy = cy + ty;
  return {a, b, cx - a * ox - b * oy, -b, a, cy + b * ox - a * oy};
}

bool is_identity(const AffineMatrix& m) {
  return m[0] == 1.0 && m[1] == 0.0 && m[2] == 0.0 && m[3] == 0.0 && m[4] == 1.0 && m[5] == 0.0;
}

Patch warp(const Patch& src, const AffineMatrix& m) {
  if (is_identity(m)) return src;
  return remap(src, affine_field(src.width(), src.height(), m));
}

}  // namespace

std::array<D4Element, 8> d4_elements() {
  std::array<D4Element, 8> out{};
  for (int i = 0; i < 8; ++i) out[i] = D4Element{i % 4, i >= 4};
  return out;
}

D4Element d4_compose(D4Element first, D4Element second) {
  // As matrices M = R^k F^f, applying `first` then `second` is
  // M2 M1 = R^k2 F^f2 R^k1 F^f1, and F R^k = R^-k F.
  const int k1 = second.flip ? -first.quarter_turns : first.quarter_turns;
  return D4Element{((second.quarter_turns + k1) % 4 + 4) % 4, first.flip != second.flip};
}

D4Element d4_inverse(D4Element e) {
  if (e.flip) return e;  // reflections are involutions
  return D4Element{(4 - e.quarter_turns) % 4, false};
}

Patch d4_apply(const Patch& src, D4Element e) {
  Patch out = e.flip ? flip_horizontal(src) : src;
  for (int i = 0; i < ((e.quarter_turns % 4) + 4) % 4; ++i) out = rotate90_ccw(out);
  return out;
}

Patch rotate(const Patch& src, double angle_deg) {
  require_in(angle_deg, -180.0, 180.0, "rotate.angle");
  const double cx = (src.width() - 1) / 2.0;
  const double cy = (src.height() - 1) / 2.0;
  return warp(src, inverse_similarity(cx, cy, angle_deg, 1.0, 0.0, 0.0));
}

Patch shift_scale_rotate(const Patch& src, const ShiftScaleRotateParams& p,
                         const ShiftScaleRotateLimits& limits) {
  require_in(p.shift_x, -limits.shift, limits.shift, "shift_scale_rotate.shift_x");
  require_in(p.shift_y, -limits.shift, limits.shift, "shift_scale_rotate.shift_y");
  require_in(p.scale, 1.0 - limits.scale, 1.0 + limits.scale, "shift_scale_rotate.scale");
  require_in(p.angle, -limits.rotate, limits.rotate, "shift_scale_rotate.angle");
  if (!(p.scale > 0.0)) throw ParameterError("shift_scale_rotate.scale must be positive");
  const double cx = (src.width() - 1) / 2.0;
  const double cy = (src.height() - 1) / 2.0;
  return warp(src, inverse_similarity(cx, cy, p.angle, p.scale, p.shift_x * src.width(),
                                      p.shift_y * src.height()));
}

DisplacementField elastic_field(int width, int height, const ElasticParams& p, RngStream& rng) {
  if (!(p.sigma > 0.0)) throw ParameterError("elastic.sigma must be positive");
  if (!(p.alpha >= 0.0)) throw ParameterError("elastic.alpha must be non-negative");
  if (!(p.alpha_affine >= 0.0)) throw ParameterError("elastic.alpha_affine must be non-negative");

  const auto n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  std::vector<double> raw_dx(n);
  std::vector<double> raw_dy(n);
  for (double& v : raw_dx) v = rng.uniform(-1.0, 1.0);
  for (double& v : raw_dy) v = rng.uniform(-1.0, 1.0);

  const auto taps = detail::gaussian_taps(p.sigma, static_cast<int>(std::ceil(4.0 * p.sigma)));
  auto dx = detail::convolve_plane_separable(raw_dx, width, height, taps);
  auto dy = detail::convolve_plane_separable(raw_dy, width, height, taps);
  for (std::size_t i = 0; i < n; ++i) {
    dx[i] *= p.alpha;
    dy[i] *= p.alpha;
  }

  // Affine jitter: three anchors displaced independently; the exact affine map
  // through them (the least-squares fit of three points) is inverted so each
  // output pixel knows where to sample.
  std::array<double, 6> jitter{};
  for (double& d : jitter) d = rng.uniform(-p.alpha_affine, p.alpha_affine);
  if (p.alpha_affine > 0.0 && width > 1 && height > 1) {
    const double w1 = width - 1;
    const double h1 = height - 1;
    const double q0x = jitter[0], q0y = jitter[1];
    const double q1x = w1 + jitter[2], q1y = jitter[3];
    const double q2x = jitter[4], q2y = h1 + jitter[5];
    // Solve L [q1-q0, q2-q0] = [p1-p0, p2-p0] for the displaced->original map.
    const double e1x = q1x - q0x, e1y = q1y - q0y;
    const double e2x = q2x - q0x, e2y = q2y - q0y;
    const double det = e1x * e2y - e2x * e1y;
    if (std::abs(det) > 1e-9) {
      // [p1-p0, p2-p0] = diag(w1, h1), so L = diag(w1, h1) * inv(E).
      const double l00 = w1 * e2y / det, l01 = -w1 * e2x / det;
      const double l10 = -h1 * e1y / det, l11 = h1 * e1x / det;
      const double t0 = -(l00 * q0x + l01 * q0y);
      const double t1 = -(l10 * q0x + l11 * q0y);
      for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
          const std::size_t i = static_cast<std::size_t>(y) * width + x;
          dx[i] += l00 * x + l01 * y + t0 - x;
          dy[i] += l10 * x + l11 * y + t1 - y;
        }
      }
    }
  }
  return DisplacementField(width, height, std::move(dx), std::move(dy));
}

Patch elastic(const Patch& src, const ElasticParams& params, RngStream& rng) {
  return remap(src, elastic_field(src.width(), src.height(), params, rng));
}

GridSteps draw_grid_steps(const GridDistortionParams& p, RngStream& rng) {
  if (p.num_steps < 1) throw ParameterError("grid_distortion.num_steps must be at least 1");
  if (!(p.distort_limit >= 0.0 && p.distort_limit < 1.0)) {
    throw ParameterError("grid_distortion.distort_limit must lie in [0, 1)");
  }
  GridSteps steps;
  steps.x.resize(static_cast<std::size_t>(p.num_steps));
  steps.y.resize(static_cast<std::size_t>(p.num_steps));
  for (double& m : steps.x) m = 1.0 + rng.uniform(-p.distort_limit, p.distort_limit);
  for (double& m : steps.y) m = 1.0 + rng.uniform(-p.distort_limit, p.distort_limit);
  return steps;
}

std::vector<double> grid_nodes(const std::vector<double>& multipliers, int extent) {
  std::vector<double> nodes(multipliers.size() + 1, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < multipliers.size(); ++i) {
    total += multipliers[i];
    nodes[i + 1] = total;
  }
  const double span = extent - 1;
  for (double& v : nodes) v = v * span / total;
  nodes.back() = span;
  return nodes;
}

namespace {

// Piecewise-linear map from uniform output nodes to distorted source nodes.
std::vector<double> axis_map(const std::vector<double>& multipliers, int extent) {
  std::vector<double> map(static_cast<std::size_t>(extent));
  const auto uniform = grid_nodes(std::vector<double>(multipliers.size(), 1.0), extent);
  const auto distorted = grid_nodes(multipliers, extent);
  if (uniform == distorted || extent == 1) {
    for (int i = 0; i < extent; ++i) map[i] = i;
    return map;
  }
  std::size_t cell = 0;
  for (int i = 0; i < extent; ++i) {
    while (cell + 2 < uniform.size() && i > uniform[cell + 1]) ++cell;
    const double t = (i - uniform[cell]) / (uniform[cell + 1] - uniform[cell]);
    map[i] = distorted[cell] + t * (distorted[cell + 1] - distorted[cell]);
  }
  return map;
}

}  // namespace

Patch grid_distortion(const Patch& src, const GridSteps& steps) {
  if (steps.x.empty() || steps.y.empty()) throw ParameterError("grid_distortion needs steps");
  for (double m : steps.x) require_in(m, 0.0, 2.0, "grid_distortion.step");
  for (double m : steps.y) require_in(m, 0.0, 2.0, "grid_distortion.step");
  const auto mx = axis_map(steps.x, src.width());
  const auto my = axis_map(steps.y, src.height());
  DisplacementField field(src.width(), src.height());
  for (int y = 0; y < src.height(); ++y) {
    for (int x = 0; x < src.width(); ++x) {
      field.dx(x, y) = mx[x] - x;
      field.dy(x, y) = my[y] - y;
    }
  }
  return remap(src, field);
}

Patch grid_distortion(const Patch& src, const GridDistortionParams& params, RngStream& rng) {
  return grid_distortion(src, draw_grid_steps(params, rng));
}

Patch optical_distortion(const Patch& src, double k) {
  if (!std::isfinite(k) || k <= -1.0 / 3.0) {
    throw ParameterError("optical_distortion.k must exceed -1/3");
  }
  const double cx = (src.width() - 1) / 2.0;
  const double cy = (src.height() - 1) / 2.0;
  const double radius = 0.5 * std::hypot(src.width() - 1.0, src.height() - 1.0);
  if (k == 0.0 || radius == 0.0) return src;

  const double kr = k / (radius * radius);
  DisplacementField field(src.width(), src.height());
  for (int y = 0; y < src.height(); ++y) {
    for (int x = 0; x < src.width(); ++x) {
      const double ddx = x - cx;
      const double ddy = y - cy;
      const double r_out = std::hypot(ddx, ddy);
      if (r_out == 0.0) continue;
      // Newton on r + kr r^3 = r_out; monotone for k > -1/3 within 1.5 R.
      double r = r_out;
      for (int it = 0; it < 50; ++it) {
        const double f = r + kr * r * r * r - r_out;
        const double step = f / (1.0 + 3.0 * kr * r * r);
        r -= step;
        if (std::abs(step) < 1e-12) break;
      }
      const double ratio = r / r_out;
      field.dx(x, y) = ddx * ratio - ddx;
      field.dy(x, y) = ddy * ratio - ddy;
    }
  }
  return remap(src, field);
}

Patch optical_distortion(const Patch& src, const OpticalDistortionParams& params,
                         RngStream& rng) {
  if (!(params.distort_limit >= 0.0)) {
    throw ParameterError("optical_distortion.distort_limit must be non-negative");
  }
  return optical_distortion(src, rng.uniform(-params.distort_limit, params.distort_limit));
}

}  // namespace histaug
