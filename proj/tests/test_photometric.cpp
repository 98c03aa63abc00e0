// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "histaug/error.hpp"
#include "histaug/photometric.hpp"
#include "support.hpp"

using namespace histaug;
using histaug::test::random_patch;

namespace {

Patch pixel(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  Patch p(1, 1);
  p.set_pixel(0, 0, r, g, b);
  return p;
}

std::array<int, 3> rgb(const Patch& p, int x = 0, int y = 0) {
  return {p.at(x, y, 0), p.at(x, y, 1), p.at(x, y, 2)};
}

using Rgb = std::array<int, 3>;

}  // namespace

TEST_CASE("neutral parameters are byte-exact identities") {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto p = random_patch(23, 17, s);
    CHECK(color_jitter(p, {}) == p);
    for (int k = 0; k < 24; ++k) REQUIRE(color_jitter(p, {}, jitter_order(k)) == p);
    CHECK(hsv_shift(p, {}) == p);
    CHECK(brightness_contrast(p, 0.0, 0.0) == p);
    CHECK(rgb_shift(p, {0, 0, 0}) == p);
    CHECK(channel_shuffle(p, {0, 1, 2}) == p);
  }
  const Patch flat(32, 32, 140);
  CHECK(clahe(flat) == flat);
  Patch tinted(32, 32);
  for (int y = 0; y < 32; ++y) {
    for (int x = 0; x < 32; ++x) tinted.set_pixel(x, y, 200, 120, 180);
  }
  CHECK(clahe(tinted) == tinted);
}

TEST_CASE("jitter orders are the 24 lexicographic permutations") {
  CHECK(jitter_order(0) == kDefaultJitterOrder);
  CHECK(jitter_order(23) == JitterOrder{JitterOp::hue, JitterOp::saturation, JitterOp::contrast,
                                        JitterOp::brightness});
  CHECK(jitter_order(1) == JitterOrder{JitterOp::brightness, JitterOp::contrast, JitterOp::hue,
                                       JitterOp::saturation});
  std::set<JitterOrder> seen;
  for (int k = 0; k < 24; ++k) seen.insert(jitter_order(k));
  CHECK(seen.size() == 24);
  CHECK_THROWS_AS(jitter_order(24), ParameterError);
}

TEST_CASE("color jitter sub-operations") {
  CHECK(rgb(color_jitter(pixel(100, 50, 250), {1.2, 1, 1, 0})) == Rgb{120, 60, 255});
  CHECK(rgb(color_jitter(pixel(101, 50, 3), {0.8, 1, 1, 0})) == Rgb{81, 40, 2});

  // Contrast blends towards the mean luma of the image (100 here).
  Patch two(2, 1);
  two.set_pixel(0, 0, 0, 0, 0);
  two.set_pixel(1, 0, 200, 200, 200);
  const auto hi = color_jitter(two, {1, 1.2, 1, 0});
  CHECK(rgb(hi, 0) == Rgb{0, 0, 0});  // -20 clamps
  CHECK(rgb(hi, 1) == Rgb{220, 220, 220});
  const auto lo = color_jitter(two, {1, 0.8, 1, 0});
  CHECK(rgb(lo, 0) == Rgb{20, 20, 20});
  CHECK(rgb(lo, 1) == Rgb{180, 180, 180});

  // Saturation blends towards the pixel's own luma: 0.299*200 + 0.587*100 = 118.5.
  CHECK(rgb(color_jitter(pixel(200, 100, 0), {1, 1, 0.85, 0})) == Rgb{188, 103, 18});

  // Hue 0.08 of a turn = 28.8 degrees; pure red gains 255 * 28.8 / 60 green.
  CHECK(rgb(color_jitter(pixel(255, 0, 0), {1, 1, 1, 0.08})) == Rgb{255, 122, 0});
  CHECK(rgb(color_jitter(pixel(255, 0, 0), {1, 1, 1, -0.08})) == Rgb{255, 0, 122});

  ColorJitterParams wide;
  wide.hue = {-0.5, 0.5};
  CHECK(rgb(color_jitter(pixel(255, 0, 0), {1, 1, 1, 1.0 / 3.0}, kDefaultJitterOrder, wide)) ==
        Rgb{0, 255, 0});

  CHECK_THROWS_AS(color_jitter(two, {1.3, 1, 1, 0}), ParameterError);
  CHECK_THROWS_AS(color_jitter(two, {1, 1, 1, 0.09}), ParameterError);
}

TEST_CASE("color jitter order matters through clamping") {
  const auto p = pixel(250, 10, 10);
  const ColorJitterFactors f{1.2, 1.0, 0.85, 0.0};
  const auto bs = color_jitter(p, f, {JitterOp::brightness, JitterOp::saturation,
                                      JitterOp::contrast, JitterOp::hue});
  const auto sb = color_jitter(p, f, {JitterOp::saturation, JitterOp::brightness,
                                      JitterOp::contrast, JitterOp::hue});
  // brightness first: red clamps at 255 (from 300), then saturation towards
  // luma 0.299*255 + 0.587*12 + 0.114*12 = 84.657.
  CHECK(rgb(bs)[0] == to_u8(0.85 * 255 + 0.15 * 84.657));
  // saturation first: luma 0.299*250 + 0.701*10 = 81.76, red 0.85*250 +
  // 0.15*81.76 = 224.764, then *1.2 = 269.7 clamps to 255.
  CHECK(rgb(sb)[0] == 255);
  CHECK(rgb(sb)[1] == to_u8(1.2 * (0.85 * 10 + 0.15 * 81.76)));
}

TEST_CASE("hsv shift") {
  // 15 units = 30 degrees: red -> orange.
  CHECK(rgb(hsv_shift(pixel(255, 0, 0), {15, 0, 0})) == Rgb{255, 128, 0});
  CHECK(rgb(hsv_shift(pixel(255, 0, 0), {-15, 0, 0})) == Rgb{255, 0, 128});
  // Gray has no hue to rotate.
  CHECK(rgb(hsv_shift(pixel(90, 90, 90), {15, 0, 0})) == Rgb{90, 90, 90});
  // Value scales the whole pixel: 100 -> 115.
  CHECK(rgb(hsv_shift(pixel(100, 50, 0), {0, 0, 15})) == Rgb{115, 58, 0});
  CHECK(rgb(hsv_shift(pixel(250, 125, 0), {0, 0, 15})) == Rgb{255, 128, 0});
  // Saturation 255 -> 235 at v = 200, h = 30 degrees.
  CHECK(rgb(hsv_shift(pixel(200, 100, 0), {0, -20, 0})) == Rgb{200, 108, 16});
  CHECK_THROWS_AS(hsv_shift(pixel(1, 2, 3), {16, 0, 0}), ParameterError);

  // Zero shift is lossless on every tested color.
  auto rng = make_rng(3, 0, 0, "colors");
  Patch many(256, 256);
  for (auto& v : many.data()) v = static_cast<std::uint8_t>(rng.uniform_int(0, 255));
  CHECK(hsv_shift(many, {}) == many);
}

TEST_CASE("brightness contrast lookup") {
  const auto p = random_patch(16, 16, 4);
  const auto out = brightness_contrast(p, 0.1, -0.2);
  for (std::size_t i = 0; i < p.size(); ++i) {
    REQUIRE(out.data()[i] == to_u8((p.data()[i] - 128.0) * 0.8 + 128.0 + 25.5));
  }
  CHECK(rgb(brightness_contrast(pixel(0, 128, 255), 0.2, 0.2)) == Rgb{25, 179, 255});
  CHECK_THROWS_AS(brightness_contrast(p, 0.21, 0.0), ParameterError);
}

TEST_CASE("clahe lookup table") {
  // Four bins {6, 2, 0, 0}: mean 2, clip at 2 leaves {2, 2, 0, 0} and an
  // excess of 4 spread as 1 per bin -> {3, 3, 1, 1}, cumulative {3, 6, 7, 8}
  // over 8, mapped onto [0, 3].
  const double hist[] = {6, 2, 0, 0};
  const auto lut = clahe_lut(hist, 1.0, 0.0, 3.0);
  REQUIRE(lut.size() == 4);
  CHECK(lut[0] == doctest::Approx(9.0 / 8));
  CHECK(lut[1] == doctest::Approx(18.0 / 8));
  CHECK(lut[2] == doctest::Approx(21.0 / 8));
  CHECK(lut[3] == doctest::Approx(3.0));

  // Clip 2 x mean = 4: {4, 2, 0, 0} plus 0.5 each -> {4.5, 2.5, 0.5, 0.5}.
  const auto lut2 = clahe_lut(hist, 2.0, 0.0, 3.0);
  CHECK(lut2[0] == doctest::Approx(3 * 4.5 / 8));
  CHECK(lut2[1] == doctest::Approx(3 * 7.0 / 8));
  CHECK(lut2[2] == doctest::Approx(3 * 7.5 / 8));
  CHECK(lut2[3] == doctest::Approx(3.0));
  CHECK_THROWS_AS(clahe_lut(hist, 0.0, 0, 3), ParameterError);
}

TEST_CASE("clahe on a checkerboard") {
  // Every 16x16 tile holds 128 pixels at 64 and 128 at 192. With clip 2 the
  // two populated bins are cut to 2 and the excess 252 spreads as 252/256
  // per bin, so level 64 maps to 64 + 128 * (65 * 252/256 + 2) / 256 and
  // level 192 to 64 + 128 * (193 * 252/256 + 4) / 256.
  Patch board(64, 64);
  for (int y = 0; y < 64; ++y) {
    for (int x = 0; x < 64; ++x) {
      const std::uint8_t v = (x + y) % 2 ? 192 : 64;
      board.set_pixel(x, y, v, v, v);
    }
  }
  const double dark = 64 + 128 * (65 * 252.0 / 256 + 2) / 256;
  const double light = 64 + 128 * (193 * 252.0 / 256 + 4) / 256;
  REQUIRE(to_u8(dark) == 97);
  REQUIRE(to_u8(light) == 161);
  const auto out = clahe(board, {2.0, 4, 4});
  for (int y = 0; y < 64; ++y) {
    for (int x = 0; x < 64; ++x) {
      REQUIRE(out.at(x, y, 1) == ((x + y) % 2 ? 161 : 97));
    }
  }
  CHECK_THROWS_AS(clahe(Patch(3, 8), {2.0, 4, 4}), ShapeError);
}

TEST_CASE("channel operations") {
  CHECK(rgb(rgb_shift(pixel(10, 250, 100), {-20, 10, 5})) == Rgb{0, 255, 105});
  CHECK_THROWS_AS(rgb_shift(pixel(1, 1, 1), {21, 0, 0}), ParameterError);

  // R -> G -> B -> R: output G holds old R, so perm = {2, 0, 1}.
  CHECK(rgb(channel_shuffle(pixel(10, 20, 30), {2, 0, 1})) == Rgb{30, 10, 20});
  CHECK_THROWS_AS(channel_shuffle(pixel(1, 2, 3), {0, 0, 1}), ParameterError);

  // 0.299*10 + 0.587*20 + 0.114*30 = 18.15
  CHECK(rgb(to_grayscale(pixel(10, 20, 30))) == Rgb{18, 18, 18});
  const auto gray = to_grayscale(random_patch(9, 9, 5));
  CHECK(to_grayscale(gray) == gray);
}
