// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <vector>

#include "histaug/image.hpp"
#include "histaug/remap.hpp"
#include "histaug/rng.hpp"

namespace histaug {

// ---------------------------------------------------------------------------
// Dihedral symmetries of the square

/// Element of D4: optional horizontal flip applied first, then `quarter_turns`
/// counter-clockwise 90 degree rotations.
struct D4Element {
  int quarter_turns = 0;  // 0..3
  bool flip = false;

  friend bool operator==(const D4Element&, const D4Element&) = default;
};

/// The 8 elements in a fixed order: rotations 0..3 without flip, then with.
std::array<D4Element, 8> d4_elements();

/// Element equivalent to applying `first` and then `second`.
D4Element d4_compose(D4Element first, D4Element second);
D4Element d4_inverse(D4Element e);

/// Exact pixel permutation. 90/270 degree elements swap width and height.
Patch d4_apply(const Patch& src, D4Element e);

// ---------------------------------------------------------------------------
// Affine warps. All warps sample bilinearly with a mirrored border.

/// Rotation about the patch center; positive angles turn the content
/// counter-clockwise, matching d4_apply with one quarter turn at 90 degrees.
Patch rotate(const Patch& src, double angle_deg);

struct ShiftScaleRotateParams {
  double shift_x = 0.0;  // fraction of width
  double shift_y = 0.0;  // fraction of height
  double scale = 1.0;
  double angle = 0.0;  // degrees
};

/// Symmetric limits: shift in [-shift, shift], scale in [1-scale, 1+scale],
/// angle in [-rotate, rotate].
struct ShiftScaleRotateLimits {
  double shift = 0.08;
  double scale = 0.15;
  double rotate = 30.0;
};

/// Scale about the center, rotate, then translate, as one resampling pass.
/// Throws ParameterError for values outside `limits`.
Patch shift_scale_rotate(const Patch& src, const ShiftScaleRotateParams& params,
                         const ShiftScaleRotateLimits& limits = {});

// ---------------------------------------------------------------------------
// Random non-rigid warps

struct ElasticParams {
  double alpha = 40.0;
  double sigma = 4.0;
  double alpha_affine = 8.0;
};

/// Field of the elastic transform. Draw order: the raw dx noise in raster
/// order, then dy, then the three affine anchor points (x then y each) at
/// (0,0), (w-1,0), (0,h-1).
DisplacementField elastic_field(int width, int height, const ElasticParams& params,
                                RngStream& rng);
Patch elastic(const Patch& src, const ElasticParams& params, RngStream& rng);

struct GridDistortionParams {
  int num_steps = 5;
  double distort_limit = 0.2;
};

/// Resolved cell multipliers (1 + u) per axis.
struct GridSteps {
  std::vector<double> x;
  std::vector<double> y;
};

/// Draws num_steps multipliers for x, then num_steps for y.
GridSteps draw_grid_steps(const GridDistortionParams& params, RngStream& rng);

/// Distorted node positions along one axis of extent `extent`; the first and
/// last nodes are pinned to 0 and extent-1.
std::vector<double> grid_nodes(const std::vector<double>& multipliers, int extent);

Patch grid_distortion(const Patch& src, const GridSteps& steps);
Patch grid_distortion(const Patch& src, const GridDistortionParams& params, RngStream& rng);

struct OpticalDistortionParams {
  double distort_limit = 0.15;
};

/// Radial model r' = r * (1 + k (r/R)^2) about the patch center, R the
/// half-diagonal. Content at radius r moves to r'.
Patch optical_distortion(const Patch& src, double k);
Patch optical_distortion(const Patch& src, const OpticalDistortionParams& params,
                         RngStream& rng);

}  // namespace histaug
