// Copyright 2026 The unitailkit Authors.
// SPDX-License-Identifier: Apache-2.0

// Exact geometry for quadrilateral boxes.
//
// Coordinates are image pixels with y increasing downward. A QuadBox lists
// its corners top-left first and then clockwise as seen on screen, which is
// a positive signed area under the usual shoelace sum
//   0.5 * sum(x_i * y_{i+1} - x_{i+1} * y_i).
// Every polygon produced here (hulls, clip results) uses the same
// orientation.
//
// All functions are pure and may be called concurrently.

#ifndef UNITAIL_GEOMETRY_HPP_
#define UNITAIL_GEOMETRY_HPP_

#include <array>
#include <optional>
#include <span>
#include <vector>

namespace unitail::geometry {

// Degeneracy tolerance in pixels (or pixels^2 for areas).
inline constexpr double kEpsilon = 1e-9;

struct Point2D {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Point2D operator+(Point2D a, Point2D b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Point2D operator-(Point2D a, Point2D b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Point2D operator*(double s, Point2D p) { return {s * p.x, s * p.y}; }
  friend constexpr bool operator==(Point2D, Point2D) = default;
};

constexpr double cross(Point2D a, Point2D b) { return a.x * b.y - a.y * b.x; }
constexpr double dot(Point2D a, Point2D b) { return a.x * b.x + a.y * b.y; }
double norm(Point2D v);

// Corner indices of a QuadBox.
enum Corner : int { kTopLeft = 0, kTopRight = 1, kBottomRight = 2, kBottomLeft = 3 };

// Four corners, top-left first, clockwise on screen.
//
// QuadBox is a plain value; validity (simple, positive area) is checked by
// the operations that need it and by the dataset loaders. Use `checked` to
// construct a quad that is known to satisfy the invariants.
struct QuadBox {
  std::array<Point2D, 4> corners{};

  // Throws DegenerateGeometryError unless the corners form a simple polygon
  // with strictly positive signed area.
  static QuadBox checked(const std::array<Point2D, 4>& corners);
  // Builds a quad from x0,y0,...,x3,y3 without validation.
  static QuadBox from_flat(std::span<const double> xy);
  // Axis-aligned rectangle [x0,x1] x [y0,y1].
  static QuadBox rectangle(double x0, double y0, double x1, double y1);

  const Point2D& operator[](int i) const { return corners[static_cast<std::size_t>(i)]; }
  std::array<double, 8> flat() const;

  friend bool operator==(const QuadBox&, const QuadBox&) = default;
};

struct Polygon {
  std::vector<Point2D> vertices;

  Polygon() = default;
  explicit Polygon(std::vector<Point2D> v) : vertices(std::move(v)) {}
  explicit Polygon(const QuadBox& q) : vertices(q.corners.begin(), q.corners.end()) {}

  std::size_t size() const { return vertices.size(); }
};

// Row-major 3x3 projective transform, normalised so that m[8] == 1.
struct Homography {
  std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

  static Homography identity() { return {}; }
  static Homography translation(double tx, double ty) { return {{1, 0, tx, 0, 1, ty, 0, 0, 1}}; }

  Point2D apply(Point2D p) const;
  double determinant() const;
  // Throws DegenerateGeometryError when the matrix is singular.
  Homography inverse() const;
};

struct AxisAlignedBox {
  double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;
};

struct EdgeDistances {
  double left = 0.0;
  double right = 0.0;
  double top = 0.0;
  double bottom = 0.0;
};

// Signed shoelace area; positive for the QuadBox orientation.
double signed_area(std::span<const Point2D> poly);

// Absolute area. Throws DegenerateGeometryError for fewer than 3 vertices.
double shoelace_area(std::span<const Point2D> poly);
double shoelace_area(const Polygon& poly);
double shoelace_area(const QuadBox& q);

bool is_simple(std::span<const Point2D> poly);
// True when every turn has the same sign as the signed area (collinear
// vertices allowed) and the area is non-zero.
bool is_convex(std::span<const Point2D> poly);
bool is_convex(const QuadBox& q);

AxisAlignedBox bounding_box(std::span<const Point2D> points);

// Monotone-chain hull, positive orientation, no collinear vertices.
// Throws DegenerateGeometryError when fewer than 3 distinct points exist or
// all points are collinear.
Polygon convex_hull(std::span<const Point2D> points);

// Sutherland-Hodgman clip of `subject` by the convex polygon `clip`.
// Returns nullopt when the intersection has no area.
std::optional<Polygon> clip_polygon(const Polygon& subject, const Polygon& clip);

// Exact intersection-over-union. Non-convex quads are replaced by their
// convex hull first. Throws DegenerateGeometryError for zero-area quads.
double quad_iou(const QuadBox& a, const QuadBox& b);

// Area of (region ∩ quad) divided by the quad area. `region` may be
// non-convex; the quad is hulled if needed.
double intersection_over_quad_area(const Polygon& region, const QuadBox& q);

// Area-weighted centroid.
Point2D gravity_center(std::span<const Point2D> poly);
Point2D gravity_center(const QuadBox& q);

// Moves every corner toward the gravity center by the factor (1 - alpha).
// Throws ParameterError unless 0 <= alpha < 1.
QuadBox shrink_quad(const QuadBox& q, double alpha);

// Winding-number containment; boundary points count as inside.
bool contains(std::span<const Point2D> poly, Point2D p);
// Distance from p to the closest edge segment.
double boundary_distance(std::span<const Point2D> poly, Point2D p);
// Inside and farther than kEpsilon from every edge.
bool strictly_inside(const QuadBox& q, Point2D p);

// Distances from p to the infinite lines through the left (bl->tl),
// right (tr->br), top (tl->tr) and bottom (br->bl) edges.
// Throws ExteriorPointError unless p is strictly inside q.
EdgeDistances point_edge_distances(Point2D p, const QuadBox& q);

// sqrt(top * bottom / (left * right)) over Euclidean edge lengths.
double aspect_ratio(const QuadBox& q);

// Interior angles in degrees, one per corner.
std::array<double, 4> interior_angles(const QuadBox& q);
// Population standard deviation of the interior angles, in degrees.
// Throws DegenerateGeometryError for non-convex quads.
double interior_angle_std(const QuadBox& q);

// Perspective transform sending tl->(0,0), tr->(w,0), br->(w,h), bl->(0,h).
Homography rectify_homography(const QuadBox& q, double out_w, double out_h);

}  // namespace unitail::geometry

#endif  // UNITAIL_GEOMETRY_HPP_
