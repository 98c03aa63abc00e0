// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "histaug/error.hpp"
#include "histaug/geometric.hpp"
#include "support.hpp"

using namespace histaug;
using histaug::test::random_patch;

namespace {

// Independent pixel-level oracle: one counter-clockwise quarter turn.
Patch rot90_oracle(const Patch& p) {
  Patch out(p.height(), p.width());
  for (int y = 0; y < out.height(); ++y) {
    for (int x = 0; x < out.width(); ++x) {
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = p.at(p.width() - 1 - y, x, c);
    }
  }
  return out;
}

Patch hflip_oracle(const Patch& p) {
  Patch out(p.width(), p.height());
  for (int y = 0; y < p.height(); ++y) {
    for (int x = 0; x < p.width(); ++x) {
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = p.at(p.width() - 1 - x, y, c);
    }
  }
  return out;
}

Patch d4_oracle(Patch p, D4Element e) {
  if (e.flip) p = hflip_oracle(p);
  for (int i = 0; i < e.quarter_turns; ++i) p = rot90_oracle(p);
  return p;
}

int mean_abs_diff_interior(const Patch& a, const Patch& b, int margin) {
  long total = 0;
  long n = 0;
  for (int y = margin; y < a.height() - margin; ++y) {
    for (int x = margin; x < a.width() - margin; ++x) {
      for (int c = 0; c < 3; ++c) {
        total += std::abs(int(a.at(x, y, c)) - int(b.at(x, y, c)));
        ++n;
      }
    }
  }
  return static_cast<int>(total / n);
}

}  // namespace

TEST_CASE("d4 elements match the pixel oracle") {
  const auto square = random_patch(7, 7, 1);
  const auto wide = random_patch(9, 4, 2);
  for (const auto e : d4_elements()) {
    CHECK(d4_apply(square, e) == d4_oracle(square, e));
    CHECK(d4_apply(wide, e) == d4_oracle(wide, e));
  }
  CHECK(d4_apply(wide, {1, false}).width() == 4);
}

TEST_CASE("d4 group laws") {
  const auto elements = d4_elements();
  const std::set<std::pair<int, bool>> all = [&] {
    std::set<std::pair<int, bool>> s;
    for (const auto e : elements) s.insert({e.quarter_turns, e.flip});
    return s;
  }();
  REQUIRE(all.size() == 8);

  const auto p = random_patch(6, 5, 3);
  const D4Element identity{};
  for (const auto a : elements) {
    CHECK(d4_compose(a, identity) == a);
    CHECK(d4_compose(identity, a) == a);
    CHECK(d4_compose(a, d4_inverse(a)) == identity);
    CHECK(d4_apply(d4_apply(p, a), d4_inverse(a)) == p);
    for (const auto b : elements) {
      const auto ab = d4_compose(a, b);
      CHECK(all.count({ab.quarter_turns, ab.flip}) == 1);
      CHECK(d4_apply(d4_apply(p, a), b) == d4_apply(p, ab));
      for (const auto c : elements) {
        CHECK(d4_compose(d4_compose(a, b), c) == d4_compose(a, d4_compose(b, c)));
      }
    }
  }
  // Not abelian: a flip and a quarter turn do not commute.
  CHECK_FALSE(d4_compose({0, true}, {1, false}) == d4_compose({1, false}, {0, true}));
}

TEST_CASE("rotate") {
  const auto p = random_patch(16, 16, 4);
  CHECK(rotate(p, 0.0) == p);
  CHECK(rotate(p, 90.0) == d4_apply(p, {1, false}));
  CHECK(rotate(p, -90.0) == d4_apply(p, {3, false}));
  CHECK(rotate(p, 180.0) == d4_apply(p, {2, false}));
  CHECK(rotate(p, -180.0) == d4_apply(p, {2, false}));
  CHECK_THROWS_AS(rotate(p, 180.5), ParameterError);
  CHECK_THROWS_AS(rotate(p, std::nan("")), ParameterError);

  // A small rotation of a constant patch stays constant (mirrored border).
  const Patch flat(20, 12, 99);
  CHECK(rotate(flat, 17.0) == flat);
}

TEST_CASE("rotate turns content counter-clockwise") {
  // A bright dot right of centre ends up above centre after +90 degrees.
  Patch p(21, 21, 0);
  p.set_pixel(15, 10, 255, 255, 255);
  const auto r = rotate(p, 90.0);
  CHECK(r.at(10, 5, 0) == 255);
  const auto small = rotate(p, 45.0);
  const double c = 10 + 5 * std::cos(M_PI / 4);
  const double s = 10 - 5 * std::sin(M_PI / 4);
  CHECK(small.at(int(std::lround(c)), int(std::lround(s)), 0) > 40);
}

TEST_CASE("shift scale rotate") {
  const auto p = random_patch(50, 40, 5);
  CHECK(shift_scale_rotate(p, {}) == p);

  // 0.08 * 50 = 4 px right, 0.05 * 40 = 2 px down.
  const auto moved = shift_scale_rotate(p, {0.08, 0.05, 1.0, 0.0});
  for (int y = 2; y < 40; ++y) {
    for (int x = 4; x < 50; ++x) REQUIRE(moved.at(x, y, 0) == p.at(x - 4, y - 2, 0));
  }

  CHECK(shift_scale_rotate(p, {0, 0, 1.0, 30.0}) == rotate(p, 30.0));
  CHECK_THROWS_AS(shift_scale_rotate(p, {0.09, 0, 1, 0}), ParameterError);
  CHECK_THROWS_AS(shift_scale_rotate(p, {0, 0, 1.2, 0}), ParameterError);
  CHECK_THROWS_AS(shift_scale_rotate(p, {0, 0, 1, -31}), ParameterError);
  CHECK_NOTHROW(shift_scale_rotate(p, {0.08, -0.08, 0.85, -30}));

  // Zooming in by 1.15 about the centre keeps the central pixel.
  Patch dot(41, 41, 0);
  dot.set_pixel(20, 20, 200, 200, 200);
  CHECK(shift_scale_rotate(dot, {0, 0, 1.15, 0}).at(20, 20, 0) == 200);
}

TEST_CASE("elastic") {
  const auto p = random_patch(32, 24, 6);
  auto rng = make_rng(42, 0, 0, "elastic");
  CHECK(elastic(p, {0.0, 4.0, 0.0}, rng) == p);

  auto a = make_rng(42, 1, 2, "elastic");
  auto b = make_rng(42, 1, 2, "elastic");
  const auto field = elastic_field(32, 24, {}, a);
  CHECK(field.all_finite());
  CHECK(a.draws() == 2 * 32 * 24 + 6);
  CHECK(elastic(p, {}, b) == remap(p, field));

  // Smoothed noise magnitude is bounded by alpha (smoothing is a convex
  // average of values in [-1, 1]) plus the affine part.
  auto c = make_rng(42, 1, 3, "elastic");
  const auto pure = elastic_field(32, 24, {40.0, 4.0, 0.0}, c);
  for (const double v : pure.dx_values()) REQUIRE(std::abs(v) <= 40.0);
  CHECK(c.draws() == 2 * 32 * 24 + 6);  // the affine draws happen even when unused

  auto d = make_rng(42, 0, 0, "elastic");
  CHECK_THROWS_AS(elastic(p, {-1.0, 4.0, 0.0}, d), ParameterError);
  CHECK_THROWS_AS(elastic(p, {1.0, 0.0, 0.0}, d), ParameterError);
}

TEST_CASE("grid distortion") {
  const auto p = random_patch(30, 20, 7);
  GridSteps ones{std::vector<double>(5, 1.0), std::vector<double>(5, 1.0)};
  CHECK(grid_distortion(p, ones) == p);

  auto rng = make_rng(42, 0, 0, "grid");
  CHECK(grid_distortion(p, {5, 0.0}, rng) == p);

  const auto nodes = grid_nodes({1.2, 0.8, 1.0, 1.1, 0.9}, 30);
  REQUIRE(nodes.size() == 6);
  CHECK(nodes.front() == 0.0);
  CHECK(nodes.back() == 29.0);
  // Cumulative multipliers 0, 1.2, 2.0, 3.0, 4.1, 5.0 scaled by 29/5.
  CHECK(nodes[1] == doctest::Approx(1.2 * 29 / 5));
  CHECK(nodes[3] == doctest::Approx(3.0 * 29 / 5));
  for (std::size_t i = 1; i < nodes.size(); ++i) CHECK(nodes[i] > nodes[i - 1]);

  auto r1 = make_rng(42, 0, 9, "grid");
  const auto steps = draw_grid_steps({5, 0.2}, r1);
  CHECK(r1.draws() == 10);
  for (double m : steps.x) {
    CHECK(m >= 0.8);
    CHECK(m <= 1.2);
  }
  auto r2 = make_rng(42, 0, 9, "grid");
  CHECK(grid_distortion(p, {5, 0.2}, r2) == grid_distortion(p, steps));

  GridSteps bad{{1.0, 2.5}, {1.0, 1.0}};
  CHECK_THROWS_AS(grid_distortion(p, bad), ParameterError);
}

TEST_CASE("optical distortion") {
  const auto p = random_patch(40, 40, 8);
  CHECK(optical_distortion(p, 0.0) == p);
  CHECK_THROWS_AS(optical_distortion(p, -0.4), ParameterError);

  // The center is a fixed point of any radial model.
  Patch dot(41, 41, 10);
  dot.set_pixel(20, 20, 250, 250, 250);
  CHECK(optical_distortion(dot, 0.15).at(20, 20, 0) == 250);
  CHECK(optical_distortion(dot, -0.15).at(20, 20, 0) == 250);

  // Small k barely moves a smooth image.
  const auto smooth = test::blob_patch(48, 48, 3);
  CHECK(mean_abs_diff_interior(optical_distortion(smooth, 0.02), smooth, 2) <= 3);

  auto a = make_rng(1, 0, 0, "optical");
  auto b = make_rng(1, 0, 0, "optical");
  CHECK(optical_distortion(p, {0.15}, a) == optical_distortion(p, {0.15}, b));
  CHECK(a.draws() == 1);
}
