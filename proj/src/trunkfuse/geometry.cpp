// Copyright 2026 The trunkfuse Authors
// SPDX-License-Identifier: Apache-2.0

#include "trunkfuse/geometry.hpp"

#include <algorithm>
#include <limits>

#include <Eigen/Dense>

#include "trunkfuse/error.hpp"

namespace trunkfuse {

namespace {

Point perp(Point a) { return {-a.y, a.x}; }

Point normalized(Point a) {
  const double n = norm(a);
  return {a.x / n, a.y / n};
}

// Box-local coordinates: first along the width axis, second along height.
Point to_local(const OrientedBox& box, Point p) {
  const Point u = box.major_axis();
  const Point d = p - box.center();
  return {dot(d, u), dot(d, perp(u))};
}

Point from_local(const OrientedBox& box, Point q) {
  const Point u = box.major_axis();
  return box.center() + u * q.x + perp(u) * q.y;
}

double orientation(Point a, Point b, Point c) { return cross(b - a, c - a); }

bool on_segment(Point a, Point b, Point p) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) &&
         std::min(a.y, b.y) <= p.y && p.y <= std::max(a.y, b.y);
}

std::vector<Point> drop_repeated(std::span<const Point> pts, bool closed) {
  std::vector<Point> out;
  out.reserve(pts.size());
  for (const Point& p : pts) {
    if (out.empty() || distance(out.back(), p) > 1e-12) out.push_back(p);
  }
  if (closed) {
    while (out.size() > 1 && distance(out.front(), out.back()) <= 1e-12) {
      out.pop_back();
    }
  }
  return out;
}

// One Barry-Goldman evaluation of the centripetal Catmull-Rom segment p1->p2.
struct CatmullRomSegment {
  Point p0, p1, p2, p3;
  double t0 = 0.0, t1 = 0.0, t2 = 0.0, t3 = 0.0;

  CatmullRomSegment(Point a, Point b, Point c, Point d)
      : p0(a), p1(b), p2(c), p3(d) {
    t1 = t0 + std::sqrt(std::max(distance(p0, p1), 1e-12));
    t2 = t1 + std::sqrt(std::max(distance(p1, p2), 1e-12));
    t3 = t2 + std::sqrt(std::max(distance(p2, p3), 1e-12));
  }

  static Point lerp(Point a, Point b, double ta, double tb, double t) {
    return a * ((tb - t) / (tb - ta)) + b * ((t - ta) / (tb - ta));
  }

  // s in [0, 1) along the segment.
  Point at(double s) const {
    const double t = t1 + (t2 - t1) * s;
    const Point a1 = lerp(p0, p1, t0, t1, t);
    const Point a2 = lerp(p1, p2, t1, t2, t);
    const Point a3 = lerp(p2, p3, t2, t3, t);
    const Point b1 = lerp(a1, a2, t0, t2, t);
    const Point b2 = lerp(a2, a3, t1, t3, t);
    return lerp(b1, b2, t1, t2, t);
  }
};

void emit_segment(std::vector<Point>& out, Point a, Point b, Point c, Point d,
                  double samples_per_unit) {
  const CatmullRomSegment seg(a, b, c, d);
  const double chord = distance(b, c);
  const auto n = static_cast<std::size_t>(
      std::max(1.0, std::ceil(chord * samples_per_unit)));
  out.push_back(b);
  for (std::size_t k = 1; k < n; ++k) {
    out.push_back(seg.at(static_cast<double>(k) / static_cast<double>(n)));
  }
}

}  // namespace

std::array<Point, 4> OrientedBox::corners() const {
  const Point u = major_axis();
  const Point v = perp(u);
  const Point c = center();
  const Point hu = u * (width / 2.0);
  const Point hv = v * (height / 2.0);
  return {c - hu - hv, c + hu - hv, c + hu + hv, c - hu + hv};
}

double wrap_angle_pi(double angle) {
  double r = std::fmod(angle, kPi);
  if (r < 0.0) r += kPi;
  if (r >= kPi) r = 0.0;
  return r;
}

OrientedBox canonicalize_obb(const OrientedBox& box) {
  if (!(box.width > 0.0) || !(box.height > 0.0) || !std::isfinite(box.width) ||
      !std::isfinite(box.height)) {
    throw Error(ErrorCode::kNonPositiveExtent,
                "box extents must be positive (width=" +
                    std::to_string(box.width) +
                    ", height=" + std::to_string(box.height) + ")");
  }
  OrientedBox out = box;
  if (out.width < out.height) {
    std::swap(out.width, out.height);
    out.angle += kPi / 2.0;
  }
  out.angle = wrap_angle_pi(out.angle);
  if (out.width == out.height) {
    // Squares are symmetric under quarter turns.
    out.angle = std::fmod(out.angle, kPi / 2.0);
  }
  return out;
}

bool is_canonical(const OrientedBox& box) {
  return box.height > 0.0 && box.width >= box.height && box.angle >= 0.0 &&
         box.angle < kPi;
}

double signed_area(std::span<const Point> ring) {
  const std::size_t n = ring.size();
  if (n < 3) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += cross(ring[i], ring[(i + 1) % n]);
  }
  return acc / 2.0;
}

double obb_intersection_area(const OrientedBox& a, const OrientedBox& b) {
  const double reach = (std::hypot(a.width, a.height) +
                        std::hypot(b.width, b.height)) / 2.0;
  if (distance(a.center(), b.center()) > reach) return 0.0;

  // Sutherland-Hodgman: clip a's quadrilateral against each edge of b.
  // Convex quad clipped by four half-planes never exceeds 8 vertices.
  std::array<Point, 16> buf_a{};
  std::array<Point, 16> buf_b{};
  const auto ca = a.corners();
  std::copy(ca.begin(), ca.end(), buf_a.begin());
  std::size_t count = 4;
  Point* poly = buf_a.data();
  Point* next = buf_b.data();

  const auto cb = b.corners();
  for (std::size_t e = 0; e < 4 && count > 0; ++e) {
    const Point e0 = cb[e];
    const Point edge = cb[(e + 1) % 4] - e0;
    std::size_t out = 0;
    for (std::size_t i = 0; i < count; ++i) {
      const Point cur = poly[i];
      const Point prev = poly[(i + count - 1) % count];
      const double sc = cross(edge, cur - e0);
      const double sp = cross(edge, prev - e0);
      if (sc >= 0.0) {
        if (sp < 0.0) next[out++] = prev + (cur - prev) * (sp / (sp - sc));
        next[out++] = cur;
      } else if (sp >= 0.0) {
        next[out++] = prev + (cur - prev) * (sp / (sp - sc));
      }
    }
    count = out;
    std::swap(poly, next);
  }
  if (count < 3) return 0.0;
  return std::abs(signed_area(std::span<const Point>(poly, count)));
}

double obb_iou(const OrientedBox& a, const OrientedBox& b) {
  const double inter = obb_intersection_area(a, b);
  if (inter <= 0.0) return 0.0;
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

bool obb_contains(const OrientedBox& box, Point p, double slack) {
  const Point q = to_local(box, p);
  return std::abs(q.x) <= box.width / 2.0 + slack &&
         std::abs(q.y) <= box.height / 2.0 + slack;
}

OrientedBox inflate(const OrientedBox& box, double margin) {
  OrientedBox out = box;
  out.width += 2.0 * margin;
  out.height += 2.0 * margin;
  return out;
}

Point clamp_to_obb(const OrientedBox& box, Point p) {
  Point q = to_local(box, p);
  q.x = std::clamp(q.x, -box.width / 2.0, box.width / 2.0);
  q.y = std::clamp(q.y, -box.height / 2.0, box.height / 2.0);
  return from_local(box, q);
}

std::array<Segment, 4> obb_edges(const OrientedBox& box) {
  const auto c = box.corners();
  return {Segment{c[0], c[1]}, Segment{c[2], c[3]}, Segment{c[1], c[2]},
          Segment{c[3], c[0]}};
}

std::array<Point, 2> obb_short_edge_midpoints(const OrientedBox& box) {
  const Point h = box.major_axis() * (box.width / 2.0);
  return {box.center() - h, box.center() + h};
}

std::vector<Point> convex_hull(std::span<const Point> points) {
  std::vector<Point> pts(points.begin(), points.end());
  std::sort(pts.begin(), pts.end(), [](Point a, Point b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;

  std::vector<Point> hull(2 * pts.size());
  std::size_t k = 0;
  for (const Point& p : pts) {
    while (k >= 2 && orientation(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
    hull[k++] = p;
  }
  const std::size_t lower = k + 1;
  for (std::size_t i = pts.size() - 1; i-- > 0;) {
    while (k >= lower && orientation(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) {
      --k;
    }
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

OrientedBox min_area_obb(std::span<const Point> points) {
  if (points.size() < 3) {
    throw Error(ErrorCode::kDegenerateGeometry,
                "need at least 3 points, got " + std::to_string(points.size()));
  }
  std::vector<Point> hull = convex_hull(points);
  double extent = 0.0;
  for (const Point& p : hull) extent = std::max(extent, distance(p, hull[0]));
  // Near-coincident hull vertices give edges with meaningless directions.
  std::vector<Point> kept;
  for (const Point& p : hull) {
    if (kept.empty() || distance(p, kept.back()) > 1e-9 * extent) kept.push_back(p);
  }
  while (kept.size() > 1 && distance(kept.back(), kept.front()) <= 1e-9 * extent) {
    kept.pop_back();
  }
  hull = std::move(kept);
  const std::size_t n = hull.size();
  if (n < 3 || signed_area(hull) <= 1e-12 * extent * extent) {
    throw Error(ErrorCode::kDegenerateGeometry, "points are collinear");
  }

  // Rotating calipers: for each hull edge the extreme vertices along the
  // edge direction and its normal advance monotonically around the hull.
  auto next = [n](std::size_t i) { return (i + 1) % n; };
  std::size_t far_u = 0;
  std::size_t near_u = 0;
  std::size_t far_v = 0;
  double best_area = std::numeric_limits<double>::infinity();
  OrientedBox best;

  for (std::size_t i = 0; i < n; ++i) {
    const Point u = normalized(hull[next(i)] - hull[i]);
    const Point v = perp(u);
    if (i == 0) {
      for (std::size_t p = 1; p < n; ++p) {
        if (dot(hull[p], u) > dot(hull[far_u], u)) far_u = p;
        if (dot(hull[p], u) < dot(hull[near_u], u)) near_u = p;
        if (dot(hull[p], v) > dot(hull[far_v], v)) far_v = p;
      }
    } else {
      for (std::size_t s = 0; s < n && dot(hull[next(far_u)], u) > dot(hull[far_u], u); ++s) {
        far_u = next(far_u);
      }
      for (std::size_t s = 0; s < n && dot(hull[next(far_v)], v) > dot(hull[far_v], v); ++s) {
        far_v = next(far_v);
      }
      for (std::size_t s = 0; s < n && dot(hull[next(near_u)], u) < dot(hull[near_u], u); ++s) {
        near_u = next(near_u);
      }
    }
    const double umin = dot(hull[near_u], u);
    const double umax = dot(hull[far_u], u);
    const double vmin = dot(hull[i], v);
    const double vmax = dot(hull[far_v], v);
    const double area = (umax - umin) * (vmax - vmin);
    if (area < best_area * (1.0 - 1e-12)) {
      best_area = area;
      const Point c = u * ((umin + umax) / 2.0) + v * ((vmin + vmax) / 2.0);
      best = OrientedBox{c.x, c.y, umax - umin, vmax - vmin,
                         std::atan2(u.y, u.x)};
    }
  }
  return canonicalize_obb(best);
}

OrientedBox envelope_obb(std::span<const OrientedBox> boxes) {
  if (boxes.empty()) {
    throw Error(ErrorCode::kEmptyInput, "envelope of zero boxes");
  }
  std::vector<Point> pts;
  pts.reserve(boxes.size() * 4);
  for (const auto& b : boxes) {
    const auto c = b.corners();
    pts.insert(pts.end(), c.begin(), c.end());
  }
  return min_area_obb(pts);
}

double segment_inside_fraction(const Segment& seg, const OrientedBox& box) {
  if (!(seg.length() > 0.0)) {
    throw Error(ErrorCode::kZeroLengthSegment, "segment has zero length");
  }
  // Liang-Barsky in the box frame.
  const Point a = to_local(box, seg.p0);
  const Point d = to_local(box, seg.p1) - a;
  const double hw = box.width / 2.0;
  const double hh = box.height / 2.0;
  const std::array<double, 4> p{-d.x, d.x, -d.y, d.y};
  const std::array<double, 4> q{a.x + hw, hw - a.x, a.y + hh, hh - a.y};
  double t0 = 0.0;
  double t1 = 1.0;
  for (std::size_t i = 0; i < 4; ++i) {
    if (p[i] == 0.0) {
      if (q[i] < 0.0) return 0.0;
      continue;
    }
    const double r = q[i] / p[i];
    if (p[i] < 0.0) {
      t0 = std::max(t0, r);
    } else {
      t1 = std::min(t1, r);
    }
  }
  return t1 > t0 ? t1 - t0 : 0.0;
}

std::vector<Point> sample_spline(std::span<const Point> control,
                                 double samples_per_unit) {
  const std::vector<Point> pts = drop_repeated(control, false);
  if (pts.size() < 2) {
    throw Error(ErrorCode::kTooFewPoints,
                "spline needs at least 2 distinct control points");
  }
  const std::size_t n = pts.size();
  // Reflected phantom points clamp the curve to its end points.
  const Point head = pts[0] * 2.0 - pts[1];
  const Point tail = pts[n - 1] * 2.0 - pts[n - 2];
  std::vector<Point> out;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const Point a = i == 0 ? head : pts[i - 1];
    const Point d = i + 2 < n ? pts[i + 2] : tail;
    emit_segment(out, a, pts[i], pts[i + 1], d, samples_per_unit);
  }
  out.push_back(pts[n - 1]);
  return out;
}

std::vector<Point> sample_closed_spline(std::span<const Point> control,
                                        double samples_per_unit) {
  const std::vector<Point> pts = drop_repeated(control, true);
  if (pts.size() < 3) {
    throw Error(ErrorCode::kTooFewPoints,
                "closed spline needs at least 3 distinct control points");
  }
  const std::size_t n = pts.size();
  std::vector<Point> out;
  for (std::size_t i = 0; i < n; ++i) {
    emit_segment(out, pts[(i + n - 1) % n], pts[i], pts[(i + 1) % n],
                 pts[(i + 2) % n], samples_per_unit);
  }
  return out;
}

EllipseFit fit_ellipse(std::span<const Point> points) {
  if (points.size() < 5) {
    throw Error(ErrorCode::kTooFewPoints,
                "ellipse fit needs at least 5 points, got " +
                    std::to_string(points.size()));
  }
  const auto n = static_cast<Eigen::Index>(points.size());

  // Normalize for conditioning.
  Point mean{};
  for (const Point& p : points) mean = mean + p;
  mean = mean * (1.0 / static_cast<double>(points.size()));
  double spread = 0.0;
  for (const Point& p : points) spread += dot(p - mean, p - mean);
  const double scale = std::sqrt(spread / static_cast<double>(points.size()));
  if (!(scale > 0.0)) {
    throw Error(ErrorCode::kNotAnEllipse, "all points coincide");
  }

  // Direct least squares with the ellipse constraint 4ac - b^2 = 1, solved in
  // the numerically stable reduced 3x3 form.
  Eigen::MatrixX3d quad(n, 3);
  Eigen::MatrixX3d lin(n, 3);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Point q = (points[static_cast<std::size_t>(i)] - mean) * (1.0 / scale);
    quad.row(i) << q.x * q.x, q.x * q.y, q.y * q.y;
    lin.row(i) << q.x, q.y, 1.0;
  }
  const Eigen::Matrix3d s1 = quad.transpose() * quad;
  const Eigen::Matrix3d s2 = quad.transpose() * lin;
  const Eigen::Matrix3d s3 = lin.transpose() * lin;
  Eigen::FullPivLU<Eigen::Matrix3d> s3_lu(s3);
  if (!s3_lu.isInvertible()) {
    throw Error(ErrorCode::kNotAnEllipse, "points are collinear");
  }
  const Eigen::Matrix3d t = -s3_lu.solve(s2.transpose());
  const Eigen::Matrix3d reduced = s1 + s2 * t;
  Eigen::Matrix3d c1_inv;
  c1_inv << 0.0, 0.0, 0.5,
            0.0, -1.0, 0.0,
            0.5, 0.0, 0.0;
  Eigen::EigenSolver<Eigen::Matrix3d> solver(c1_inv * reduced);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::kNotAnEllipse, "eigen decomposition failed");
  }

  int pick = -1;
  double pick_value = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 3; ++k) {
    if (std::abs(solver.eigenvalues()(k).imag()) > 1e-12) continue;
    const Eigen::Vector3d v = solver.eigenvectors().col(k).real();
    const double cond = 4.0 * v(0) * v(2) - v(1) * v(1);
    if (cond <= 0.0) continue;
    const double lambda = std::abs(solver.eigenvalues()(k).real());
    if (lambda < pick_value) {
      pick_value = lambda;
      pick = k;
    }
  }
  if (pick < 0) {
    throw Error(ErrorCode::kNotAnEllipse,
                "constrained fit has no elliptical solution");
  }
  const Eigen::Vector3d a1 = solver.eigenvectors().col(pick).real();
  const Eigen::Vector3d a2 = t * a1;
  double A = a1(0), B = a1(1), C = a1(2), D = a2(0), E = a2(1), F = a2(2);

  const double disc = B * B - 4.0 * A * C;
  if (!(disc < 0.0)) {
    throw Error(ErrorCode::kNotAnEllipse, "conic is not an ellipse");
  }
  const double x0 = (2.0 * C * D - B * E) / disc;
  const double y0 = (2.0 * A * E - B * D) / disc;
  double f0 = F + (D * x0 + E * y0) / 2.0;
  if (f0 > 0.0) {
    A = -A; B = -B; C = -C; D = -D; E = -E; F = -F;
    f0 = -f0;
  }
  const double mid = (A + C) / 2.0;
  const double rad = std::hypot((A - C) / 2.0, B / 2.0);
  const double lam_small = mid - rad;
  const double lam_large = mid + rad;
  if (!(lam_small > 0.0) || !(f0 < 0.0)) {
    throw Error(ErrorCode::kNotAnEllipse, "conic is an imaginary ellipse");
  }
  // Eigenvector of the larger eigenvalue is the minor axis direction.
  const double minor_dir = 0.5 * std::atan2(B, A - C);

  EllipseFit fit;
  fit.ellipse.cx = mean.x + scale * x0;
  fit.ellipse.cy = mean.y + scale * y0;
  fit.ellipse.semi_major = scale * std::sqrt(-f0 / lam_small);
  fit.ellipse.semi_minor = scale * std::sqrt(-f0 / lam_large);
  fit.ellipse.rotation = wrap_angle_pi(minor_dir + kPi / 2.0);
  if (fit.ellipse.semi_major == fit.ellipse.semi_minor) {
    fit.ellipse.rotation = 0.0;
  }

  double acc = 0.0;
  for (const Point& p : points) {
    const Point q = (p - mean) * (1.0 / scale);
    const double value = A * q.x * q.x + B * q.x * q.y + C * q.y * q.y +
                         D * q.x + E * q.y + F;
    const double gx = 2.0 * A * q.x + B * q.y + D;
    const double gy = B * q.x + 2.0 * C * q.y + E;
    const double g = std::hypot(gx, gy);
    const double dist = g > 0.0 ? value / g : 0.0;
    acc += dist * dist;
  }
  fit.rms_residual = scale * std::sqrt(acc / static_cast<double>(points.size()));
  return fit;
}

std::vector<Point> ellipse_polygon(const Ellipse& e, std::size_t vertices) {
  const Point u{std::cos(e.rotation), std::sin(e.rotation)};
  const Point v = perp(u);
  const Point c{e.cx, e.cy};
  std::vector<Point> out;
  out.reserve(vertices);
  for (std::size_t k = 0; k < vertices; ++k) {
    const double t = 2.0 * kPi * static_cast<double>(k) /
                     static_cast<double>(vertices);
    out.push_back(c + u * (e.semi_major * std::cos(t)) +
                  v * (e.semi_minor * std::sin(t)));
  }
  return out;
}

bool point_in_polygon(Point p, std::span<const Point> ring) {
  bool inside = false;
  const std::size_t n = ring.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point a = ring[i];
    const Point b = ring[j];
    if ((a.y > p.y) != (b.y > p.y) &&
        p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x) {
      inside = !inside;
    }
  }
  return inside;
}

namespace {

// Orientation snapped to zero within rounding noise of its magnitude bound.
double robust_orientation(Point a, Point b, Point c) {
  const double d = orientation(a, b, c);
  const Point u = b - a;
  const Point v = c - a;
  return d * d <= 1e-20 * dot(u, u) * dot(v, v) ? 0.0 : d;
}

}  // namespace

bool segments_intersect(Point a0, Point a1, Point b0, Point b1) {
  if (std::max(a0.x, a1.x) < std::min(b0.x, b1.x) || std::max(b0.x, b1.x) < std::min(a0.x, a1.x) ||
      std::max(a0.y, a1.y) < std::min(b0.y, b1.y) || std::max(b0.y, b1.y) < std::min(a0.y, a1.y)) {
    return false;
  }
  const double d1 = robust_orientation(b0, b1, a0);
  const double d2 = robust_orientation(b0, b1, a1);
  const double d3 = robust_orientation(a0, a1, b0);
  const double d4 = robust_orientation(a0, a1, b1);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) &&
      ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) {
    return true;
  }
  if (d1 == 0 && on_segment(b0, b1, a0)) return true;
  if (d2 == 0 && on_segment(b0, b1, a1)) return true;
  if (d3 == 0 && on_segment(a0, a1, b0)) return true;
  if (d4 == 0 && on_segment(a0, a1, b1)) return true;
  return false;
}

bool is_simple_polygon(std::span<const Point> ring) {
  const std::size_t n = ring.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Point a0 = ring[i];
    const Point a1 = ring[(i + 1) % n];
    if (a0 == a1) return false;
    // Adjacent edges may only share their common vertex.
    const Point nxt = ring[(i + 2) % n];
    if (orientation(a0, a1, nxt) == 0.0 && dot(a1 - a0, nxt - a1) < 0.0) {
      return false;
    }
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;
      if (segments_intersect(a0, a1, ring[j], ring[(j + 1) % n])) return false;
    }
  }
  return true;
}

Contour::Contour(std::vector<Point> vertices) {
  vertices = drop_repeated(vertices, true);
  if (vertices.size() < 3) {
    throw Error(ErrorCode::kDegenerateGeometry,
                "contour needs at least 3 distinct vertices");
  }
  const double a = signed_area(vertices);
  if (!(std::abs(a) > 0.0)) {
    throw Error(ErrorCode::kDegenerateGeometry, "contour has zero area");
  }
  if (!is_simple_polygon(vertices)) {
    throw Error(ErrorCode::kSelfIntersection, "contour is self-intersecting");
  }
  if (a < 0.0) std::reverse(vertices.begin(), vertices.end());
  vertices_ = std::move(vertices);
}

double Contour::area() const { return signed_area(vertices_); }

}  // namespace trunkfuse
