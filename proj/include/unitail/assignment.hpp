// Copyright 2026 The unitailkit Authors.
// SPDX-License-Identifier: Apache-2.0

// Training-target assignment for anchor-free quadrilateral detectors.
//
// A ground-truth quad is assigned to two adjacent pyramid levels by its
// scale (Soft Scale), with complementary loss weights. On each level every
// grid point inside the shrunk quad becomes responsible for the quad, with
// weight = quad-centerness * level factor and an 8-channel corner offset
// target normalised by the level stride.

#ifndef UNITAIL_ASSIGNMENT_HPP_
#define UNITAIL_ASSIGNMENT_HPP_

#include <array>
#include <span>
#include <vector>

#include "unitail/geometry.hpp"

namespace unitail::assign {

using geometry::AxisAlignedBox;
using geometry::Point2D;
using geometry::QuadBox;

struct PyramidSpec {
  int min_level = 3;
  int max_level = 7;
  // Level whose receptive field matches objects of pretrain_size.
  int reference_level = 5;
  double pretrain_size = 224.0;

  // Throws ParameterError if the range is empty or excludes reference_level.
  void validate() const;
  static double stride(int level);
};

struct LevelWeight {
  int level = 0;
  double factor = 0.0;

  friend bool operator==(const LevelWeight&, const LevelWeight&) = default;
};

// Result of Soft Scale: the ceil level with its factor and the floor level
// with the complementary factor. Both levels are already clamped into the
// pyramid and may coincide.
struct SoftScale {
  LevelWeight upper;
  LevelWeight lower;

  // Distinct levels, ascending, with the factors of coinciding levels summed.
  std::vector<LevelWeight> levels() const;
};

struct AssignmentTarget {
  int level = 0;
  int grid_y = 0;
  int grid_x = 0;
  double weight = 0.0;
  // (corner - pixel) / stride for tl, tr, br, bl as x, y pairs.
  std::array<double, 8> offsets{};
  int gt_index = 0;
};

// Original anchor-free centerness on an axis-aligned box.
// Throws ExteriorPointError unless p is strictly inside the box.
double centerness_fcos(Point2D p, const AxisAlignedBox& box);

// Quad-centerness: sqrt of the product over the four edge lines of
// min(d_p, d_g) / max(d_p, d_g), where d_g are the distances of the gravity
// center. Equals 1 at the gravity center.
double centerness_quad(Point2D p, const QuadBox& q);

// Throws ParameterError for non-positive or non-finite area.
SoftScale soft_scale(double area, const PyramidSpec& spec = {});

struct AssignParams {
  PyramidSpec pyramid;
  double shrink_ratio = 0.3;
  unsigned threads = 1;
};

// Targets sorted by (level, grid_y, grid_x, gt_index). A grid point claimed
// by several quads on one level goes to the smallest-area quad. A quad whose
// shrunk region holds no grid point on any of its levels gets the grid point
// nearest its gravity center on each level, weighted by the level factor.
std::vector<AssignmentTarget> assign_targets(std::span<const QuadBox> gts, int image_w,
                                             int image_h, const AssignParams& params = {});

}  // namespace unitail::assign

#endif  // UNITAIL_ASSIGNMENT_HPP_
