// Copyright 2026 The unitailkit Authors.
// SPDX-License-Identifier: Apache-2.0

#include "unitail/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <Eigen/Dense>

#include "unitail/error.hpp"

namespace unitail::geometry {

namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

std::size_t next_index(std::size_t i, std::size_t n) { return i + 1 == n ? 0 : i + 1; }

int orientation_sign(Point2D a, Point2D b, Point2D c) {
  const double v = cross(b - a, c - a);
  if (v > 0) return 1;
  if (v < 0) return -1;
  return 0;
}

bool on_segment(Point2D a, Point2D b, Point2D p) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) &&
         std::min(a.y, b.y) <= p.y && p.y <= std::max(a.y, b.y);
}

bool segments_intersect(Point2D p1, Point2D p2, Point2D q1, Point2D q2) {
  const int o1 = orientation_sign(p1, p2, q1);
  const int o2 = orientation_sign(p1, p2, q2);
  const int o3 = orientation_sign(q1, q2, p1);
  const int o4 = orientation_sign(q1, q2, p2);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(p1, p2, q1)) return true;
  if (o2 == 0 && on_segment(p1, p2, q2)) return true;
  if (o3 == 0 && on_segment(q1, q2, p1)) return true;
  if (o4 == 0 && on_segment(q1, q2, p2)) return true;
  return false;
}

double point_segment_distance(Point2D p, Point2D a, Point2D b) {
  const Point2D ab = b - a;
  const double len2 = dot(ab, ab);
  if (len2 == 0.0) return norm(p - a);
  const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return norm(p - (a + t * ab));
}

double line_distance(Point2D p, Point2D a, Point2D b) {
  const double len = norm(b - a);
  if (len <= kEpsilon) {
    throw DegenerateGeometryError("quad edge has zero length");
  }
  return std::abs(cross(b - a, p - a)) / len;
}

// Convex, positively oriented version of a quad used by the IoU routines.
Polygon convex_region(const QuadBox& q) {
  if (std::abs(signed_area(q.corners)) <= kEpsilon) {
    throw DegenerateGeometryError("quad has zero area");
  }
  if (signed_area(q.corners) > 0 && is_convex(q.corners)) return Polygon(q);
  return convex_hull(q.corners);
}

bool boxes_disjoint(const AxisAlignedBox& a, const AxisAlignedBox& b) {
  return a.x1 < b.x0 || b.x1 < a.x0 || a.y1 < b.y0 || b.y1 < a.y0;
}

}  // namespace

double norm(Point2D v) { return std::hypot(v.x, v.y); }

QuadBox QuadBox::checked(const std::array<Point2D, 4>& corners) {
  for (const Point2D& p : corners) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw DegenerateGeometryError("quad corner is not finite");
    }
  }
  if (!is_simple(corners)) {
    throw DegenerateGeometryError("quad is self-intersecting");
  }
  if (signed_area(corners) <= kEpsilon) {
    throw DegenerateGeometryError(
        "quad must have positive area with corners clockwise from top-left");
  }
  return QuadBox{corners};
}

QuadBox QuadBox::from_flat(std::span<const double> xy) {
  if (xy.size() != 8) {
    throw FormatError("quad needs 8 coordinates, got " + std::to_string(xy.size()));
  }
  QuadBox q;
  for (std::size_t i = 0; i < 4; ++i) q.corners[i] = {xy[2 * i], xy[2 * i + 1]};
  return q;
}

QuadBox QuadBox::rectangle(double x0, double y0, double x1, double y1) {
  return QuadBox{{Point2D{x0, y0}, Point2D{x1, y0}, Point2D{x1, y1}, Point2D{x0, y1}}};
}

std::array<double, 8> QuadBox::flat() const {
  std::array<double, 8> out{};
  for (std::size_t i = 0; i < 4; ++i) {
    out[2 * i] = corners[i].x;
    out[2 * i + 1] = corners[i].y;
  }
  return out;
}

Point2D Homography::apply(Point2D p) const {
  const double w = m[6] * p.x + m[7] * p.y + m[8];
  return {(m[0] * p.x + m[1] * p.y + m[2]) / w, (m[3] * p.x + m[4] * p.y + m[5]) / w};
}

double Homography::determinant() const {
  return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
         m[2] * (m[3] * m[7] - m[4] * m[6]);
}

Homography Homography::inverse() const {
  const double det = determinant();
  if (std::abs(det) < 1e-300 || !std::isfinite(det)) {
    throw DegenerateGeometryError("homography is singular");
  }
  Homography inv;
  inv.m = {m[4] * m[8] - m[5] * m[7], m[2] * m[7] - m[1] * m[8], m[1] * m[5] - m[2] * m[4],
           m[5] * m[6] - m[3] * m[8], m[0] * m[8] - m[2] * m[6], m[2] * m[3] - m[0] * m[5],
           m[3] * m[7] - m[4] * m[6], m[1] * m[6] - m[0] * m[7], m[0] * m[4] - m[1] * m[3]};
  // Normalise when possible; a zero corner entry means the origin maps to
  // infinity and the matrix is kept in its raw scale.
  const double s = std::abs(inv.m[8]) > 1e-300 ? inv.m[8] : det;
  for (double& v : inv.m) v /= s;
  return inv;
}

double signed_area(std::span<const Point2D> poly) {
  const std::size_t n = poly.size();
  if (n < 3) return 0.0;
  // Translate to the first vertex to limit cancellation on large coordinates.
  const Point2D o = poly[0];
  double sum = 0.0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    sum += cross(poly[i] - o, poly[i + 1] - o);
  }
  return 0.5 * sum;
}

double shoelace_area(std::span<const Point2D> poly) {
  if (poly.size() < 3) {
    throw DegenerateGeometryError("polygon needs at least 3 vertices, got " +
                                  std::to_string(poly.size()));
  }
  return std::abs(signed_area(poly));
}

double shoelace_area(const Polygon& poly) { return shoelace_area(poly.vertices); }
double shoelace_area(const QuadBox& q) { return shoelace_area(q.corners); }

bool is_simple(std::span<const Point2D> poly) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    if (poly[i] == poly[next_index(i, n)]) return false;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const Point2D a1 = poly[i];
    const Point2D a2 = poly[next_index(i, n)];
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
      const Point2D b1 = poly[j];
      const Point2D b2 = poly[next_index(j, n)];
      if (adjacent) {
        // Adjacent edges may only share their common vertex; a fold-back
        // shows up as the far endpoint lying on the other edge.
        const Point2D far = (j == i + 1) ? b2 : b1;
        const Point2D shared = (j == i + 1) ? a2 : a1;
        const Point2D other = (j == i + 1) ? a1 : a2;
        if (orientation_sign(other, shared, far) == 0 &&
            dot(other - shared, far - shared) > 0) {
          return false;
        }
        continue;
      }
      if (segments_intersect(a1, a2, b1, b2)) return false;
    }
  }
  return true;
}

bool is_convex(std::span<const Point2D> poly) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  const double area = signed_area(poly);
  if (std::abs(area) <= kEpsilon) return false;
  const double sign = area > 0 ? 1.0 : -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Point2D a = poly[i];
    const Point2D b = poly[next_index(i, n)];
    const Point2D c = poly[next_index(next_index(i, n), n)];
    if (sign * cross(b - a, c - b) < -kEpsilon) return false;
  }
  return is_simple(poly);
}

bool is_convex(const QuadBox& q) { return is_convex(q.corners); }

AxisAlignedBox bounding_box(std::span<const Point2D> points) {
  AxisAlignedBox box{std::numeric_limits<double>::infinity(),
                     std::numeric_limits<double>::infinity(),
                     -std::numeric_limits<double>::infinity(),
                     -std::numeric_limits<double>::infinity()};
  for (const Point2D& p : points) {
    box.x0 = std::min(box.x0, p.x);
    box.y0 = std::min(box.y0, p.y);
    box.x1 = std::max(box.x1, p.x);
    box.y1 = std::max(box.y1, p.y);
  }
  return box;
}

Polygon convex_hull(std::span<const Point2D> points) {
  std::vector<Point2D> pts(points.begin(), points.end());
  std::sort(pts.begin(), pts.end(), [](Point2D a, Point2D b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) {
    throw DegenerateGeometryError("convex hull needs at least 3 distinct points");
  }
  std::vector<Point2D> hull(2 * pts.size());
  std::size_t k = 0;
  for (const Point2D& p : pts) {
    while (k >= 2 && cross(hull[k - 1] - hull[k - 2], p - hull[k - 2]) <= 0) --k;
    hull[k++] = p;
  }
  const std::size_t lower = k + 1;
  for (std::size_t i = pts.size() - 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  if (hull.size() < 3 || std::abs(signed_area(hull)) <= kEpsilon) {
    throw DegenerateGeometryError("all points are collinear");
  }
  return Polygon(std::move(hull));
}

std::optional<Polygon> clip_polygon(const Polygon& subject, const Polygon& clip) {
  if (clip.size() < 3 || !is_convex(clip.vertices)) {
    throw ParameterError("clip polygon must be convex");
  }
  std::vector<Point2D> window = clip.vertices;
  if (signed_area(window) < 0) std::reverse(window.begin(), window.end());

  std::vector<Point2D> output = subject.vertices;
  std::vector<Point2D> input;
  input.reserve(output.size() + window.size());
  for (std::size_t e = 0; e < window.size() && !output.empty(); ++e) {
    const Point2D a = window[e];
    const Point2D edge = window[next_index(e, window.size())] - a;
    input.swap(output);
    output.clear();
    Point2D prev = input.back();
    double prev_side = cross(edge, prev - a);
    for (const Point2D& cur : input) {
      const double side = cross(edge, cur - a);
      if (side >= 0) {
        if (prev_side < 0) {
          const double t = prev_side / (prev_side - side);
          output.push_back(prev + t * (cur - prev));
        }
        output.push_back(cur);
      } else if (prev_side >= 0) {
        const double t = prev_side / (prev_side - side);
        output.push_back(prev + t * (cur - prev));
      }
      prev = cur;
      prev_side = side;
    }
  }
  if (output.size() < 3 || std::abs(signed_area(output)) <= kEpsilon) return std::nullopt;
  return Polygon(std::move(output));
}

double quad_iou(const QuadBox& a, const QuadBox& b) {
  // Fixed argument order keeps the result bitwise symmetric.
  const std::array<double, 8> fa = a.flat();
  const std::array<double, 8> fb = b.flat();
  const bool swap = std::lexicographical_compare(fb.begin(), fb.end(), fa.begin(), fa.end());
  const Polygon pa = convex_region(swap ? b : a);
  const Polygon pb = convex_region(swap ? a : b);
  if (boxes_disjoint(bounding_box(pa.vertices), bounding_box(pb.vertices))) return 0.0;

  const double area_a = shoelace_area(pa);
  const double area_b = shoelace_area(pb);
  const std::optional<Polygon> inter = clip_polygon(pa, pb);
  if (!inter) return 0.0;
  const double inter_area = shoelace_area(*inter);
  const double iou = inter_area / (area_a + area_b - inter_area);
  return std::clamp(iou, 0.0, 1.0);
}

double intersection_over_quad_area(const Polygon& region, const QuadBox& q) {
  const Polygon pq = convex_region(q);
  if (region.size() < 3) return 0.0;
  if (boxes_disjoint(bounding_box(region.vertices), bounding_box(pq.vertices))) return 0.0;
  const std::optional<Polygon> inter = clip_polygon(region, pq);
  if (!inter) return 0.0;
  return std::clamp(shoelace_area(*inter) / shoelace_area(pq), 0.0, 1.0);
}

Point2D gravity_center(std::span<const Point2D> poly) {
  if (poly.size() < 3) {
    throw DegenerateGeometryError("polygon needs at least 3 vertices");
  }
  const Point2D o = poly[0];
  double area2 = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  for (std::size_t i = 1; i + 1 < poly.size(); ++i) {
    const Point2D p = poly[i] - o;
    const Point2D q = poly[i + 1] - o;
    const double c = cross(p, q);
    area2 += c;
    cx += (p.x + q.x) * c;
    cy += (p.y + q.y) * c;
  }
  if (std::abs(area2) <= 2 * kEpsilon) {
    throw DegenerateGeometryError("gravity center of a zero-area polygon");
  }
  return {o.x + cx / (3.0 * area2), o.y + cy / (3.0 * area2)};
}

Point2D gravity_center(const QuadBox& q) { return gravity_center(q.corners); }

QuadBox shrink_quad(const QuadBox& q, double alpha) {
  if (!(alpha >= 0.0 && alpha < 1.0)) {
    throw ParameterError("shrink ratio must lie in [0, 1), got " + std::to_string(alpha));
  }
  const Point2D g = gravity_center(q);
  QuadBox out;
  for (std::size_t i = 0; i < 4; ++i) {
    out.corners[i] = g + (1.0 - alpha) * (q.corners[i] - g);
  }
  return out;
}

bool contains(std::span<const Point2D> poly, Point2D p) {
  const std::size_t n = poly.size();
  int winding = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const Point2D a = poly[i];
    const Point2D b = poly[next_index(i, n)];
    const double side = cross(b - a, p - a);
    if (side == 0.0 && on_segment(a, b, p)) return true;
    if (a.y <= p.y) {
      if (b.y > p.y && side > 0) ++winding;
    } else if (b.y <= p.y && side < 0) {
      --winding;
    }
  }
  return winding != 0;
}

double boundary_distance(std::span<const Point2D> poly, Point2D p) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < poly.size(); ++i) {
    best = std::min(best, point_segment_distance(p, poly[i], poly[next_index(i, poly.size())]));
  }
  return best;
}

bool strictly_inside(const QuadBox& q, Point2D p) {
  return contains(q.corners, p) && boundary_distance(q.corners, p) > kEpsilon;
}

EdgeDistances point_edge_distances(Point2D p, const QuadBox& q) {
  if (!strictly_inside(q, p)) {
    throw ExteriorPointError("point (" + std::to_string(p.x) + ", " + std::to_string(p.y) +
                             ") is not strictly inside the quad");
  }
  const auto& c = q.corners;
  return {line_distance(p, c[kBottomLeft], c[kTopLeft]),
          line_distance(p, c[kTopRight], c[kBottomRight]),
          line_distance(p, c[kTopLeft], c[kTopRight]),
          line_distance(p, c[kBottomRight], c[kBottomLeft])};
}

double aspect_ratio(const QuadBox& q) {
  const auto& c = q.corners;
  const double top = norm(c[kTopRight] - c[kTopLeft]);
  const double bottom = norm(c[kBottomRight] - c[kBottomLeft]);
  const double left = norm(c[kTopLeft] - c[kBottomLeft]);
  const double right = norm(c[kBottomRight] - c[kTopRight]);
  if (std::min({top, bottom, left, right}) <= kEpsilon) {
    throw DegenerateGeometryError("quad edge has zero length");
  }
  return std::sqrt((top * bottom) / (left * right));
}

std::array<double, 4> interior_angles(const QuadBox& q) {
  const double orientation = signed_area(q.corners) >= 0 ? 1.0 : -1.0;
  std::array<double, 4> angles{};
  for (std::size_t i = 0; i < 4; ++i) {
    const Point2D prev = q.corners[(i + 3) % 4];
    const Point2D cur = q.corners[i];
    const Point2D next = q.corners[(i + 1) % 4];
    const Point2D u = prev - cur;
    const Point2D v = next - cur;
    if (norm(u) <= kEpsilon || norm(v) <= kEpsilon) {
      throw DegenerateGeometryError("quad edge has zero length");
    }
    const double angle = std::atan2(std::abs(cross(u, v)), dot(u, v)) * kRadToDeg;
    const bool reflex = orientation * cross(cur - prev, next - cur) < 0;
    angles[i] = reflex ? 360.0 - angle : angle;
  }
  return angles;
}

double interior_angle_std(const QuadBox& q) {
  if (!is_convex(q)) {
    throw DegenerateGeometryError("interior angle statistics need a convex quad");
  }
  const std::array<double, 4> angles = interior_angles(q);
  double mean = 0.0;
  for (double a : angles) mean += a;
  mean /= 4.0;
  double var = 0.0;
  for (double a : angles) var += (a - mean) * (a - mean);
  return std::sqrt(var / 4.0);
}

Homography rectify_homography(const QuadBox& q, double out_w, double out_h) {
  if (!(out_w > 0.0 && out_h > 0.0)) {
    throw ParameterError("output size must be positive");
  }
  for (std::size_t i = 0; i < 4; ++i) {
    const Point2D a = q.corners[(i + 3) % 4];
    const Point2D b = q.corners[i];
    const Point2D c = q.corners[(i + 1) % 4];
    if (std::abs(cross(b - a, c - a)) <= kEpsilon) {
      throw DegenerateGeometryError("three quad corners are collinear");
    }
  }
  const std::array<Point2D, 4> dst{Point2D{0, 0}, Point2D{out_w, 0}, Point2D{out_w, out_h},
                                   Point2D{0, out_h}};

  // Conditioning: move the source corners to their mean and scale them to
  // unit average radius before solving, then undo.
  Point2D mean{};
  for (const Point2D& p : q.corners) mean = mean + 0.25 * p;
  double radius = 0.0;
  for (const Point2D& p : q.corners) radius += 0.25 * norm(p - mean);
  const double s = 1.0 / radius;

  Eigen::Matrix<double, 8, 8> a;
  Eigen::Matrix<double, 8, 1> rhs;
  for (int i = 0; i < 4; ++i) {
    const double x = (q.corners[static_cast<std::size_t>(i)].x - mean.x) * s;
    const double y = (q.corners[static_cast<std::size_t>(i)].y - mean.y) * s;
    const double u = dst[static_cast<std::size_t>(i)].x;
    const double v = dst[static_cast<std::size_t>(i)].y;
    a.row(2 * i) << x, y, 1, 0, 0, 0, -u * x, -u * y;
    a.row(2 * i + 1) << 0, 0, 0, x, y, 1, -v * x, -v * y;
    rhs(2 * i) = u;
    rhs(2 * i + 1) = v;
  }
  const Eigen::FullPivLU<Eigen::Matrix<double, 8, 8>> lu(a);
  if (!lu.isInvertible()) {
    throw DegenerateGeometryError("rectification system is singular");
  }
  const Eigen::Matrix<double, 8, 1> h = lu.solve(rhs);

  Eigen::Matrix3d hn;
  hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), 1.0;
  Eigen::Matrix3d norm_src;
  norm_src << s, 0, -s * mean.x, 0, s, -s * mean.y, 0, 0, 1;
  const Eigen::Matrix3d full = hn * norm_src;
  if (std::abs(full(2, 2)) < 1e-300) {
    throw DegenerateGeometryError("rectification maps the origin to infinity");
  }
  Homography out;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) out.m[static_cast<std::size_t>(3 * r + c)] = full(r, c) / full(2, 2);
  }
  return out;
}

}  // namespace unitail::geometry
