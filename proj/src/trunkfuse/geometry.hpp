// Copyright 2026 The trunkfuse Authors
// SPDX-License-Identifier: Apache-2.0

// Planar primitives shared by every other module. Image coordinates: origin
// top-left, x right, y down. "Counter-clockwise" always means positive
// shoelace area in those raw coordinates.

#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

namespace trunkfuse {

inline constexpr double kPi = std::numbers::pi;

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
  friend Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
  friend Point operator*(Point a, double s) { return {a.x * s, a.y * s}; }
  friend Point operator*(double s, Point a) { return {a.x * s, a.y * s}; }
  friend bool operator==(const Point&, const Point&) = default;
};

inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point a) { return std::hypot(a.x, a.y); }
inline double distance(Point a, Point b) { return norm(a - b); }

struct OrientedBox {
  double cx = 0.0;
  double cy = 0.0;
  double width = 0.0;
  double height = 0.0;
  double angle = 0.0;  // radians; direction of the width axis

  Point center() const { return {cx, cy}; }
  double area() const { return width * height; }
  // Unit vector along the width side.
  Point major_axis() const { return {std::cos(angle), std::sin(angle)}; }
  // Corners in counter-clockwise order.
  std::array<Point, 4> corners() const;

  friend bool operator==(const OrientedBox&, const OrientedBox&) = default;
};

struct Segment {
  Point p0;
  Point p1;
  double length() const { return distance(p0, p1); }
};

struct Ellipse {
  double cx = 0.0;
  double cy = 0.0;
  double semi_major = 0.0;
  double semi_minor = 0.0;
  double rotation = 0.0;  // radians in [0, pi), direction of the major axis
};

struct EllipseFit {
  Ellipse ellipse;
  // Root-mean-square Sampson (first-order geometric) distance of the input
  // points to the fitted conic, in pixels.
  double rms_residual = 0.0;
};

// Simple counter-clockwise polygon with at least three vertices. The
// constructor reverses clockwise input and rejects everything else.
class Contour {
 public:
  Contour() = default;
  explicit Contour(std::vector<Point> vertices);

  const std::vector<Point>& vertices() const { return vertices_; }
  std::size_t size() const { return vertices_.size(); }
  bool empty() const { return vertices_.empty(); }
  double area() const;

  friend bool operator==(const Contour&, const Contour&) = default;

 private:
  std::vector<Point> vertices_;
};

// Rotated box algebra.
OrientedBox canonicalize_obb(const OrientedBox& box);
bool is_canonical(const OrientedBox& box);
double obb_intersection_area(const OrientedBox& a, const OrientedBox& b);
double obb_iou(const OrientedBox& a, const OrientedBox& b);
bool obb_contains(const OrientedBox& box, Point p, double slack = 0.0);
OrientedBox inflate(const OrientedBox& box, double margin);
// Closest point of the box to p (p itself when inside).
Point clamp_to_obb(const OrientedBox& box, Point p);
// Edges of the box, the two width-side edges first.
std::array<Segment, 4> obb_edges(const OrientedBox& box);
// Midpoints of the two short edges, ordered along +major axis.
std::array<Point, 2> obb_short_edge_midpoints(const OrientedBox& box);

std::vector<Point> convex_hull(std::span<const Point> points);
OrientedBox min_area_obb(std::span<const Point> points);
OrientedBox envelope_obb(std::span<const OrientedBox> boxes);

double segment_inside_fraction(const Segment& seg, const OrientedBox& box);

// Centripetal Catmull-Rom interpolation through every control point.
std::vector<Point> sample_spline(std::span<const Point> control,
                                 double samples_per_unit);
std::vector<Point> sample_closed_spline(std::span<const Point> control,
                                        double samples_per_unit);

EllipseFit fit_ellipse(std::span<const Point> points);
std::vector<Point> ellipse_polygon(const Ellipse& e, std::size_t vertices);

// Polygon helpers on raw vertex rings (no closing duplicate).
double signed_area(std::span<const Point> ring);
bool point_in_polygon(Point p, std::span<const Point> ring);
bool is_simple_polygon(std::span<const Point> ring);
bool segments_intersect(Point a0, Point a1, Point b0, Point b1);

double wrap_angle_pi(double angle);  // into [0, pi)

}  // namespace trunkfuse
