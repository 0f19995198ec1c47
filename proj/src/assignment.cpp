// Copyright 2026 The unitailkit Authors.
// SPDX-License-Identifier: Apache-2.0

#include "unitail/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <tuple>

#include "unitail/error.hpp"
#include "unitail/parallel.hpp"

namespace unitail::assign {

namespace {

double ratio(double a, double b) { return std::min(a, b) / std::max(a, b); }

struct Candidate {
  AssignmentTarget target;
  double gt_area = 0.0;
};

AssignmentTarget make_target(int level, int gx, int gy, double weight, const QuadBox& q,
                             int gt_index) {
  const double s = PyramidSpec::stride(level);
  const Point2D p{(gx + 0.5) * s, (gy + 0.5) * s};
  AssignmentTarget t;
  t.level = level;
  t.grid_x = gx;
  t.grid_y = gy;
  t.weight = weight;
  t.gt_index = gt_index;
  for (std::size_t i = 0; i < 4; ++i) {
    t.offsets[2 * i] = (q.corners[i].x - p.x) / s;
    t.offsets[2 * i + 1] = (q.corners[i].y - p.y) / s;
  }
  return t;
}

int grid_extent(int image_size, double stride) {
  return std::max(1, static_cast<int>(std::ceil(image_size / stride)));
}

std::vector<Candidate> candidates_for(const QuadBox& q, int gt_index, int image_w, int image_h,
                                      const AssignParams& params) {
  const double area = geometry::shoelace_area(q);
  const QuadBox shrunk = geometry::shrink_quad(q, params.shrink_ratio);
  const geometry::AxisAlignedBox box = geometry::bounding_box(shrunk.corners);
  const std::vector<LevelWeight> levels = soft_scale(area, params.pyramid).levels();

  std::vector<Candidate> out;
  for (const LevelWeight& lw : levels) {
    const double s = PyramidSpec::stride(lw.level);
    const int cols = grid_extent(image_w, s);
    const int rows = grid_extent(image_h, s);
    const int gx0 = std::max(0, static_cast<int>(std::floor(box.x0 / s - 0.5)));
    const int gx1 = std::min(cols - 1, static_cast<int>(std::ceil(box.x1 / s - 0.5)));
    const int gy0 = std::max(0, static_cast<int>(std::floor(box.y0 / s - 0.5)));
    const int gy1 = std::min(rows - 1, static_cast<int>(std::ceil(box.y1 / s - 0.5)));
    for (int gy = gy0; gy <= gy1; ++gy) {
      for (int gx = gx0; gx <= gx1; ++gx) {
        const Point2D p{(gx + 0.5) * s, (gy + 0.5) * s};
        if (!geometry::strictly_inside(shrunk, p) || !geometry::strictly_inside(q, p)) continue;
        const double weight = centerness_quad(p, q) * lw.factor;
        out.push_back({make_target(lw.level, gx, gy, weight, q, gt_index), area});
      }
    }
  }

  if (out.empty()) {
    // Too small for any grid point: fall back to the cell holding the
    // gravity center, with centerness taken as 1.
    const Point2D g = geometry::gravity_center(q);
    for (const LevelWeight& lw : levels) {
      const double s = PyramidSpec::stride(lw.level);
      const int gx = std::clamp(static_cast<int>(std::floor(g.x / s)), 0, grid_extent(image_w, s) - 1);
      const int gy = std::clamp(static_cast<int>(std::floor(g.y / s)), 0, grid_extent(image_h, s) - 1);
      out.push_back({make_target(lw.level, gx, gy, lw.factor, q, gt_index), area});
    }
  }
  return out;
}

}  // namespace

void PyramidSpec::validate() const {
  if (min_level > max_level) {
    throw ParameterError("pyramid level range is empty");
  }
  if (reference_level < min_level || reference_level > max_level) {
    throw ParameterError("reference level " + std::to_string(reference_level) +
                         " is outside the pyramid");
  }
  if (min_level < 0 || max_level > 30) {
    throw ParameterError("pyramid levels must lie in [0, 30]");
  }
  if (!(pretrain_size > 0.0)) throw ParameterError("pretrain size must be positive");
}

double PyramidSpec::stride(int level) { return std::ldexp(1.0, level); }

std::vector<LevelWeight> SoftScale::levels() const {
  if (upper.level == lower.level) return {{upper.level, upper.factor + lower.factor}};
  return {lower, upper};
}

double centerness_fcos(Point2D p, const AxisAlignedBox& box) {
  const double left = p.x - box.x0;
  const double right = box.x1 - p.x;
  const double top = p.y - box.y0;
  const double bottom = box.y1 - p.y;
  if (std::min({left, right, top, bottom}) <= geometry::kEpsilon) {
    throw ExteriorPointError("point is not strictly inside the box");
  }
  return std::sqrt(ratio(left, right) * ratio(top, bottom));
}

double centerness_quad(Point2D p, const QuadBox& q) {
  const geometry::EdgeDistances dp = geometry::point_edge_distances(p, q);
  const geometry::EdgeDistances dg =
      geometry::point_edge_distances(geometry::gravity_center(q), q);
  return std::sqrt(ratio(dp.left, dg.left) * ratio(dp.right, dg.right) *
                   ratio(dp.top, dg.top) * ratio(dp.bottom, dg.bottom));
}

SoftScale soft_scale(double area, const PyramidSpec& spec) {
  spec.validate();
  if (!(area > 0.0) || !std::isfinite(area)) {
    throw ParameterError("object area must be positive and finite");
  }
  const double scale = std::log2(std::sqrt(area) / spec.pretrain_size);
  const double floor_scale = std::floor(scale);
  const double upper_factor = scale - floor_scale;

  auto clamp_level = [&](double level) {
    return static_cast<int>(std::clamp(level, static_cast<double>(spec.min_level),
                                       static_cast<double>(spec.max_level)));
  };
  SoftScale out;
  out.upper = {clamp_level(spec.reference_level + std::ceil(scale)), upper_factor};
  out.lower = {clamp_level(spec.reference_level + floor_scale), 1.0 - upper_factor};
  return out;
}

std::vector<AssignmentTarget> assign_targets(std::span<const QuadBox> gts, int image_w,
                                             int image_h, const AssignParams& params) {
  params.pyramid.validate();
  if (image_w <= 0 || image_h <= 0) throw ParameterError("image size must be positive");
  if (!(params.shrink_ratio >= 0.0 && params.shrink_ratio < 1.0)) {
    throw ParameterError("shrink ratio must lie in [0, 1)");
  }

  std::vector<std::vector<Candidate>> per_gt(gts.size());
  parallel_for(gts.size(), params.threads, [&](std::size_t i) {
    per_gt[i] = candidates_for(gts[i], static_cast<int>(i), image_w, image_h, params);
  });

  std::vector<Candidate> all;
  for (auto& c : per_gt) all.insert(all.end(), c.begin(), c.end());
  auto key = [](const Candidate& c) {
    return std::tie(c.target.level, c.target.grid_y, c.target.grid_x);
  };
  std::sort(all.begin(), all.end(), [&](const Candidate& a, const Candidate& b) {
    if (key(a) != key(b)) return key(a) < key(b);
    if (a.gt_area != b.gt_area) return a.gt_area < b.gt_area;
    return a.target.gt_index < b.target.gt_index;
  });

  std::vector<AssignmentTarget> out;
  out.reserve(all.size());
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (i > 0 && key(all[i]) == key(all[i - 1])) continue;
    out.push_back(all[i].target);
  }
  return out;
}

}  // namespace unitail::assign
