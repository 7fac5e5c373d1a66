// Copyright 2026 The trunkfuse Authors
// SPDX-License-Identifier: Apache-2.0

#include "trunkfuse/simulate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "trunkfuse/error.hpp"
#include "trunkfuse/rng.hpp"

namespace trunkfuse {

namespace {

enum StreamTag : std::uint64_t {
  kTagCount = 1,
  kTagLayout,
  kTagTrunk,
  kTagPlace,
  kTagNoise,
  kTagClutter,
  kTagMotion,
};

constexpr double kDeg = kPi / 180.0;
constexpr double kPlacementMargin = 2.0;
constexpr int kPlacementTries = 200;
constexpr int kShrinkSteps = 8;
constexpr int kScaleSteps = 20;
constexpr double kMinComponentArea = 4.0;

Point unit(double angle) { return {std::cos(angle), std::sin(angle)}; }
Point perp(Point d) { return {-d.y, d.x}; }

std::pair<std::size_t, std::size_t> quantity_range(Intensity q) {
  switch (q) {
    case Intensity::kLow: return {1, kMidQuantityMin - 1};
    case Intensity::kMid: return {kMidQuantityMin, kHighQuantityMin - 1};
    case Intensity::kHigh: return {kHighQuantityMin, 45};
  }
  return {1, 1};
}

Intensity quantity_level(std::size_t n) {
  if (n >= kHighQuantityMin) return Intensity::kHigh;
  if (n >= kMidQuantityMin) return Intensity::kMid;
  return Intensity::kLow;
}

std::pair<double, double> diameter_range(Intensity distance) {
  switch (distance) {
    case Intensity::kLow: return {40.0, 80.0};
    case Intensity::kMid: return {20.0, 40.0};
    case Intensity::kHigh: return {10.0, 20.0};
  }
  return {10.0, 20.0};
}

double truncation_prob(Intensity distance) {
  switch (distance) {
    case Intensity::kLow: return 0.5;
    case Intensity::kMid: return 0.2;
    case Intensity::kHigh: return 0.0;
  }
  return 0.0;
}

double orientation(Intensity entropy, double base, Rng& rng) {
  switch (entropy) {
    case Intensity::kLow:
      return base + std::clamp(rng.normal(0.0, 2.0 * kDeg), -6.0 * kDeg, 6.0 * kDeg);
    case Intensity::kMid: return base + rng.normal(0.0, 20.0 * kDeg);
    case Intensity::kHigh: return rng.uniform(0.0, kPi);
  }
  return base;
}

std::vector<double> bend_angles(Intensity irregularity, Rng& rng) {
  std::vector<double> bends;
  switch (irregularity) {
    case Intensity::kLow: break;
    case Intensity::kMid:
      bends.push_back(rng.uniform(4.0, 10.0) * kDeg);
      break;
    case Intensity::kHigh: {
      const auto n = rng.uniform_int(2, 3);
      for (std::int64_t i = 0; i < n; ++i) bends.push_back(rng.uniform(6.0, 15.0) * kDeg);
      break;
    }
  }
  for (double& b : bends) {
    if (rng.bernoulli(0.5)) b = -b;
  }
  return bends;
}

// Spine of the given length and bends whose chord points along `angle` and
// whose chord midpoint is the origin.
std::vector<Point> make_spine(double length, double angle, const std::vector<double>& bends) {
  const std::size_t segments = bends.size() + 1;
  const double step = length / static_cast<double>(segments);
  std::vector<Point> pts{{0.0, 0.0}};
  double heading = 0.0;
  for (std::size_t i = 0; i < segments; ++i) {
    if (i > 0) heading += bends[i - 1];
    pts.push_back(pts.back() + step * unit(heading));
  }
  const Point chord = pts.back() - pts.front();
  const double rot = angle - std::atan2(chord.y, chord.x);
  const Point mid = 0.5 * (pts.front() + pts.back());
  const double c = std::cos(rot);
  const double s = std::sin(rot);
  for (Point& p : pts) {
    const Point q = p - mid;
    p = {c * q.x - s * q.y, s * q.x + c * q.y};
  }
  return pts;
}

struct Offsets {
  std::vector<Point> left;
  std::vector<Point> right;
};

// Lateral edges at +-radius with mitered joints.
Offsets offset_lines(const SimTrunk& t) {
  const auto& s = t.spine;
  Offsets o;
  for (std::size_t i = 0; i < s.size(); ++i) {
    Point n;
    double len = t.radius;
    if (i == 0 || i + 1 == s.size()) {
      const Point d = i == 0 ? s[1] - s[0] : s[i] - s[i - 1];
      n = perp(d * (1.0 / norm(d)));
    } else {
      const Point d1 = s[i] - s[i - 1];
      const Point d2 = s[i + 1] - s[i];
      const Point n1 = perp(d1 * (1.0 / norm(d1)));
      const Point n2 = perp(d2 * (1.0 / norm(d2)));
      const Point m = n1 + n2;
      n = m * (1.0 / norm(m));
      len = t.radius / dot(n, n1);
    }
    o.left.push_back(s[i] + len * n);
    o.right.push_back(s[i] - len * n);
  }
  return o;
}

Point end_direction(const SimTrunk& t, bool cut_end) {
  const auto& s = t.spine;
  const Point d = cut_end ? s[s.size() - 1] - s[s.size() - 2] : s[1] - s[0];
  return d * (1.0 / norm(d));
}

std::size_t ellipse_vertex_count(double a, double b) {
  const double perimeter = kPi * (3.0 * (a + b) - std::sqrt((3.0 * a + b) * (a + 3.0 * b)));
  const auto n = static_cast<std::size_t>(std::clamp(std::ceil(perimeter), 32.0, 720.0));
  return (n + 3) / 4 * 4;
}

Point on_ellipse(Point center, Point d, Point n, double along, double across, double t) {
  return center + (along * std::cos(t)) * d + (across * std::sin(t)) * n;
}

// Every placed trunk, in generation order.
struct Placed {
  SimTrunk trunk;
  OrientedBox envelope;
  bool truncated = false;
};

bool overlaps_any(const OrientedBox& env, const std::vector<Placed>& placed) {
  const OrientedBox grown = inflate(env, kPlacementMargin);
  for (const Placed& p : placed) {
    if (obb_intersection_area(grown, p.envelope) > 0.0) return true;
  }
  return false;
}

bool inside_image(const OrientedBox& env, const ImageSize& img, double margin) {
  for (Point c : env.corners()) {
    if (c.x < margin || c.y < margin || c.x > img.width - margin ||
        c.y > img.height - margin) {
      return false;
    }
  }
  return true;
}

Ring image_rect(const ImageSize& img) {
  const double w = img.width;
  const double h = img.height;
  return {{0.0, 0.0}, {w, 0.0}, {w, h}, {0.0, h}};
}

std::size_t draw_count(const SceneSpec& spec) {
  if (spec.trunk_count) return *spec.trunk_count;
  const auto [lo, hi] = quantity_range(spec.scene.quantity);
  Rng rng(spec.seed, {kTagCount});
  return static_cast<std::size_t>(
      rng.uniform_int(static_cast<std::int64_t>(lo), static_cast<std::int64_t>(hi)));
}

std::optional<std::vector<Placed>> try_layout(const SceneSpec& spec, std::size_t count,
                                              int scale_step) {
  const double scale = std::pow(0.85, scale_step);
  const auto step = static_cast<std::uint64_t>(scale_step);
  Rng layout(spec.seed, {kTagLayout, step});
  const double base = layout.uniform(0.0, kPi);
  const auto [dmin, dmax] = diameter_range(spec.scene.distance);
  const double p_trunc = spec.allow_truncation ? truncation_prob(spec.scene.distance) : 0.0;
  const ImageSize& img = spec.image_size;

  std::vector<Placed> placed;
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng(spec.seed, {kTagTrunk, step, i});
    const double diameter = scale * rng.uniform(dmin, dmax);
    double length = diameter * rng.uniform(5.0, 12.0);
    double angle = orientation(spec.scene.entropy, base, rng);
    if (rng.bernoulli(0.5)) angle += kPi;
    const std::vector<double> bends = bend_angles(spec.scene.irregularity, rng);
    const bool truncate = rng.bernoulli(p_trunc);

    SimTrunk shape;
    shape.id = static_cast<std::int64_t>(i) + 1;
    shape.radius = 0.5 * diameter;
    shape.cut_depth = shape.radius * rng.uniform(0.25, 0.6);
    shape.bound_depth = shape.radius * rng.uniform(0.15, 0.35);

    Rng place(spec.seed, {kTagPlace, step, i});
    bool ok = false;
    for (int shrink = 0; shrink < kShrinkSteps && !ok; ++shrink, length *= 0.8) {
      if (length < 3.0 * diameter) break;
      shape.spine = make_spine(length, angle, bends);
      const OrientedBox local = trunk_envelope(shape);
      for (int k = 0; k < kPlacementTries; ++k) {
        const Point at{place.uniform(0.0, img.width), place.uniform(0.0, img.height)};
        OrientedBox env = local;
        env.cx += at.x;
        env.cy += at.y;
        if (!truncate && !inside_image(env, img, 1.0)) continue;
        if (truncate && inside_image(env, img, 1.0)) continue;
        // Keep the spine midpoint well inside so the side stays visible.
        if (at.x < shape.radius || at.y < shape.radius || at.x > img.width - shape.radius ||
            at.y > img.height - shape.radius) {
          continue;
        }
        if (overlaps_any(env, placed)) continue;
        placed.push_back({translated(shape, at), env, truncate});
        ok = true;
        break;
      }
    }
    if (!ok) return std::nullopt;
  }
  return placed;
}

std::optional<Contour> clipped_component(const Ring& ring, const Ring& rect, bool truncated) {
  if (!truncated) return Contour(ring);
  PolygonSet parts = polygon_intersection(ring, rect);
  if (parts.outers.empty()) return std::nullopt;
  Ring best = parts.outers[largest_ring(parts)];
  // The clipper may leave vertices a hair outside the image.
  const Point hi = rect[2];
  for (Point& p : best) p = {std::clamp(p.x, 0.0, hi.x), std::clamp(p.y, 0.0, hi.y)};
  if (std::abs(signed_area(best)) < kMinComponentArea) return std::nullopt;
  return Contour(best);
}

Point transform_point(Point p, Point center, double scale, double angle, Point shift) {
  if (scale == 1.0 && angle == 0.0) return p + shift;
  const double c = std::cos(angle) * scale;
  const double s = std::sin(angle) * scale;
  const Point q = p - center;
  return center + Point{c * q.x - s * q.y, s * q.x + c * q.y} + shift;
}

struct Jitter {
  Point shift;
  double scale = 1.0;
  double angle = 0.0;
};

Jitter draw_jitter(const NoiseModel& noise, Rng& rng) {
  Jitter j;
  j.shift = {rng.normal(0.0, noise.position_jitter_px), rng.normal(0.0, noise.position_jitter_px)};
  j.scale = std::max(0.05, 1.0 + rng.normal(0.0, noise.size_jitter_frac));
  j.angle = rng.normal(0.0, noise.angle_jitter_rad);
  return j;
}

double draw_confidence(double mean, double sigma, Rng& rng) {
  return std::clamp(rng.normal(mean, sigma), 0.0, 1.0);
}

Point centroid(const std::vector<Point>& ring) {
  double a = 0.0;
  Point c;
  for (std::size_t i = 0; i < ring.size(); ++i) {
    const Point p = ring[i];
    const Point q = ring[(i + 1) % ring.size()];
    const double w = cross(p, q);
    a += w;
    c = c + (p + q) * w;
  }
  return c * (1.0 / (3.0 * a));
}

std::vector<Point> polyline_samples(const std::vector<Point>& line, double spacing) {
  std::vector<Point> out{line.front()};
  for (std::size_t i = 0; i + 1 < line.size(); ++i) {
    const Point a = line[i];
    const Point b = line[i + 1];
    const double len = distance(a, b);
    const Point d = (b - a) * (1.0 / len);
    const double guard = std::min(1.0, 0.25 * len);
    // Close pairs around each joint keep the interpolating curve tight.
    if (i > 0) out.push_back(a + guard * d);
    const auto steps = static_cast<int>(std::max(1.0, std::ceil(len / spacing)));
    for (int k = 1; k < steps; ++k) out.push_back(a + (len * k / steps) * d);
    if (i + 2 < line.size()) out.push_back(b - guard * d);
    out.push_back(b);
  }
  return out;
}

Point spine_midpoint(const std::vector<Point>& spine) {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < spine.size(); ++i) total += distance(spine[i], spine[i + 1]);
  double left = 0.5 * total;
  for (std::size_t i = 0; i + 1 < spine.size(); ++i) {
    const double len = distance(spine[i], spine[i + 1]);
    if (left <= len) return spine[i] + (spine[i + 1] - spine[i]) * (left / len);
    left -= len;
  }
  return spine.back();
}

}  // namespace

void SceneSpec::validate() const {
  if (image_size.width < 64 || image_size.height < 64) {
    throw Error(ErrorCode::kInvalidSpec, "image_size: both sides must be at least 64 px");
  }
  if (trunk_count) {
    const auto [lo, hi] = quantity_range(scene.quantity);
    if (*trunk_count < lo || *trunk_count > hi) {
      throw Error(ErrorCode::kInvalidSpec,
                  "trunk_count: " + std::to_string(*trunk_count) + " is outside [" +
                      std::to_string(lo) + ", " + std::to_string(hi) + "] for quantity " +
                      std::string(to_string(scene.quantity)));
    }
  }
}

std::map<ComponentClass, Ring> trunk_polygons(const SimTrunk& t) {
  const Offsets o = offset_lines(t);
  const Point d_cut = end_direction(t, true);
  const Point n_cut = perp(d_cut);
  const Point d_bound = end_direction(t, false);
  const Point n_bound = perp(d_bound);
  const Point p_cut = t.spine.back();
  const Point p_bound = t.spine.front();

  const std::size_t nc = ellipse_vertex_count(t.radius, t.cut_depth);
  Ring cut(nc);
  for (std::size_t k = 0; k < nc; ++k) {
    cut[k] = on_ellipse(p_cut, d_cut, n_cut, t.cut_depth, t.radius,
                        2.0 * kPi * static_cast<double>(k) / static_cast<double>(nc));
  }
  cut[nc / 4] = o.left.back();
  cut[3 * nc / 4] = o.right.back();

  const std::size_t nb = ellipse_vertex_count(t.radius, t.bound_depth) / 2;
  Ring bound(nb + 1);
  for (std::size_t j = 0; j <= nb; ++j) {
    bound[j] = on_ellipse(p_bound, d_bound, n_bound, t.bound_depth, t.radius,
                          -0.5 * kPi + kPi * static_cast<double>(j) / static_cast<double>(nb));
  }
  bound.front() = o.right.front();
  bound.back() = o.left.front();

  Ring side = o.right;
  for (std::size_t k = 3 * nc / 4 - 1; k > nc / 4; --k) side.push_back(cut[k]);
  side.insert(side.end(), o.left.rbegin(), o.left.rend());
  for (std::size_t j = nb - 1; j >= 1; --j) side.push_back(bound[j]);

  return {{ComponentClass::kSide, std::move(side)},
          {ComponentClass::kCut, std::move(cut)},
          {ComponentClass::kBound, std::move(bound)}};
}

Ellipse cut_ellipse(const SimTrunk& t) {
  const Point n = perp(end_direction(t, true));
  return {t.spine.back().x, t.spine.back().y, std::max(t.radius, t.cut_depth),
          std::min(t.radius, t.cut_depth), wrap_angle_pi(std::atan2(n.y, n.x))};
}

std::vector<PointPrimitive> trunk_annotations(const SimTrunk& t) {
  const Offsets o = offset_lines(t);
  const double spacing = std::clamp(2.0 * t.radius, 10.0, 20.0);
  std::vector<PointPrimitive> out;
  out.push_back({PrimitiveKind::kEdge, polyline_samples(o.right, spacing), t.id});
  out.push_back({PrimitiveKind::kEdge, polyline_samples(o.left, spacing), t.id});

  const Point d_cut = end_direction(t, true);
  PointPrimitive area{PrimitiveKind::kSectionAreaPoints, {}, t.id};
  for (int k = 0; k < 12; ++k) {
    area.points.push_back(
        on_ellipse(t.spine.back(), d_cut, perp(d_cut), t.cut_depth, t.radius, 0.1 + kPi * k / 6.0));
  }
  out.push_back(std::move(area));

  const Point d_bound = end_direction(t, false);
  PointPrimitive line{PrimitiveKind::kSectionLine, {}, t.id};
  constexpr int kLinePoints = 13;
  for (int j = 0; j < kLinePoints; ++j) {
    line.points.push_back(on_ellipse(t.spine.front(), d_bound, perp(d_bound), t.bound_depth,
                                     t.radius, -0.5 * kPi + kPi * j / (kLinePoints - 1)));
  }
  line.points.front() = o.right.front();
  line.points.back() = o.left.front();
  out.push_back(std::move(line));

  out.push_back({PrimitiveKind::kAreaMarker, {spine_midpoint(t.spine)}, t.id});
  return out;
}

SimTrunk translated(const SimTrunk& t, Point offset) {
  SimTrunk out = t;
  for (Point& p : out.spine) p = p + offset;
  return out;
}

OrientedBox trunk_envelope(const SimTrunk& t) {
  std::vector<Point> pts;
  for (const auto& [cls, ring] : trunk_polygons(t)) pts.insert(pts.end(), ring.begin(), ring.end());
  return min_area_obb(pts);
}

SimScene gen_scene_model(const SceneSpec& spec) {
  spec.validate();
  const std::size_t count = draw_count(spec);
  for (int step = 0; step < kScaleSteps; ++step) {
    std::optional<std::vector<Placed>> placed = try_layout(spec, count, step);
    if (!placed) continue;
    SimScene out;
    out.frame.scene = spec.scene;
    out.frame.image_size = spec.image_size;
    const Ring rect = image_rect(spec.image_size);
    for (const Placed& p : *placed) {
      GroundTruthInstance inst;
      inst.trunk_id = p.trunk.id;
      for (const auto& [cls, ring] : trunk_polygons(p.trunk)) {
        if (auto c = clipped_component(ring, rect, p.truncated)) inst.components.emplace(cls, *c);
      }
      out.frame.instances.push_back(std::move(inst));
      out.trunks.push_back(p.trunk);
      out.truncated.push_back(p.truncated);
    }
    validate(out.frame);
    return out;
  }
  throw Error(ErrorCode::kInvalidSpec, "cannot place " + std::to_string(count) +
                                           " trunks in a " +
                                           std::to_string(spec.image_size.width) + "x" +
                                           std::to_string(spec.image_size.height) + " image");
}

GroundTruthFrame gen_scene(const SceneSpec& spec) { return gen_scene_model(spec).frame; }

AnnotationFrame gen_annotations(const SimScene& scene) {
  AnnotationFrame out;
  out.frame_id = scene.frame.frame_id;
  out.timestamp_s = scene.frame.timestamp_s;
  out.scene = scene.frame.scene;
  out.image_size = scene.frame.image_size;
  for (const SimTrunk& t : scene.trunks) {
    for (PointPrimitive& p : trunk_annotations(t)) out.primitives.push_back(std::move(p));
  }
  return out;
}

void NoiseModel::validate() const {
  auto nonneg = [](double v, const char* name) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw Error(ErrorCode::kInvalidConfig, std::string(name) + ": must be >= 0");
    }
  };
  nonneg(position_jitter_px, "position-jitter-px");
  nonneg(size_jitter_frac, "size-jitter-frac");
  nonneg(angle_jitter_rad, "angle-jitter-rad");
  nonneg(clutter_rate, "clutter-rate");
  nonneg(confidence_sigma, "confidence-sigma");
  auto prob = [](double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw Error(ErrorCode::kInvalidConfig, std::string(name) + ": must lie in [0, 1]");
    }
  };
  prob(dropout_prob, "dropout-prob");
  prob(confidence_tp, "confidence-tp");
  prob(confidence_fp, "confidence-fp");
}

DetectionFrame PerturbedDetections::to_frame(std::int64_t frame_id, double timestamp_s) const {
  DetectionFrame f;
  f.frame_id = frame_id;
  f.timestamp_s = timestamp_s;
  f.detections = ood;
  f.detections.insert(f.detections.end(), iseg.begin(), iseg.end());
  return f;
}

PerturbedDetections perturb_detections(const GroundTruthFrame& gt, const NoiseModel& noise,
                                       std::uint64_t seed) {
  noise.validate();
  PerturbedDetections out;
  const auto frame = static_cast<std::uint64_t>(gt.frame_id);
  for (const GroundTruthInstance& inst : gt.instances) {
    const auto id = static_cast<std::uint64_t>(inst.trunk_id);
    for (const auto& [cls, contour] : inst.components) {
      const auto c = static_cast<std::uint64_t>(cls);
      Rng keep(seed, {kTagNoise, frame, id, c, 0});
      if (keep.bernoulli(noise.dropout_prob)) continue;
      Correspondence corr{inst.trunk_id, cls, std::nullopt, std::nullopt};
      const std::vector<Point>& ring = contour.vertices();

      Rng ood_rng(seed, {kTagNoise, frame, id, c, 1});
      const Jitter jo = draw_jitter(noise, ood_rng);
      OrientedBox box = min_area_obb(ring);
      box.cx += jo.shift.x;
      box.cy += jo.shift.y;
      box.width *= jo.scale;
      box.height *= jo.scale;
      box.angle += jo.angle;
      Detection ood;
      ood.cls = cls;
      ood.source = TaskSource::kOod;
      ood.obb = canonicalize_obb(box);
      ood.confidence = draw_confidence(noise.confidence_tp, noise.confidence_sigma, ood_rng);
      corr.ood_index = out.ood.size();
      out.ood.push_back(std::move(ood));

      Rng iseg_rng(seed, {kTagNoise, frame, id, c, 2});
      const Jitter ji = draw_jitter(noise, iseg_rng);
      const Point center = centroid(ring);
      std::vector<Point> moved;
      moved.reserve(ring.size());
      for (Point p : ring) moved.push_back(transform_point(p, center, ji.scale, ji.angle, ji.shift));
      Detection iseg;
      iseg.cls = cls;
      iseg.source = TaskSource::kIseg;
      iseg.contour = Contour(std::move(moved));
      iseg.confidence = draw_confidence(noise.confidence_tp, noise.confidence_sigma, iseg_rng);
      corr.iseg_index = out.iseg.size();
      out.iseg.push_back(std::move(iseg));

      out.correspondences.push_back(corr);
    }
  }

  Rng clutter(seed, {kTagClutter, frame});
  const std::int64_t n = clutter.poisson(noise.clutter_rate);
  const double w = gt.image_size ? gt.image_size->width : 1024.0;
  const double h = gt.image_size ? gt.image_size->height : 1024.0;
  for (std::int64_t i = 0; i < n; ++i) {
    OrientedBox box{clutter.uniform(0.0, w), clutter.uniform(0.0, h), clutter.uniform(20.0, 200.0),
                    clutter.uniform(8.0, 40.0), clutter.uniform(0.0, kPi)};
    Detection det;
    det.cls = kComponentClasses[static_cast<std::size_t>(clutter.uniform_int(0, 2))];
    det.confidence = draw_confidence(noise.confidence_fp, noise.confidence_sigma, clutter);
    if (clutter.bernoulli(0.5)) {
      det.source = TaskSource::kOod;
      det.obb = canonicalize_obb(box);
      out.ood.push_back(std::move(det));
    } else {
      det.source = TaskSource::kIseg;
      const auto corners = box.corners();
      det.contour = Contour(std::vector<Point>(corners.begin(), corners.end()));
      out.iseg.push_back(std::move(det));
    }
    ++out.clutter;
  }
  return out;
}

void MotionSpec::validate() const {
  if (!(min_speed_px >= 0.0) || !(max_speed_px >= min_speed_px) || !std::isfinite(max_speed_px)) {
    throw Error(ErrorCode::kInvalidSpec, "speed range: need 0 <= min <= max");
  }
  if (!(accel_sigma_px >= 0.0) || !std::isfinite(accel_sigma_px)) {
    throw Error(ErrorCode::kInvalidSpec, "accel_sigma_px: must be >= 0");
  }
  if (!(frame_rate > 0.0) || !std::isfinite(frame_rate)) {
    throw Error(ErrorCode::kInvalidSpec, "frame_rate: must be > 0");
  }
}

std::vector<GroundTruthFrame> gen_sequence(const SceneSpec& spec, std::size_t frames,
                                           const MotionSpec& motion) {
  if (frames == 0) throw Error(ErrorCode::kInvalidSpec, "frames: must be at least 1");
  motion.validate();
  SceneSpec still = spec;
  still.allow_truncation = false;
  const SimScene scene = gen_scene_model(still);

  struct Path {
    std::vector<Point> offsets;  // per frame
    std::size_t alive = 0;       // frames before first border contact
    std::vector<OrientedBox> boxes;
  };
  auto make_path = [&](const OrientedBox& env, Rng* rng) {
    Path p;
    Point pos;
    Point vel;
    if (rng) {
      vel = rng->uniform(motion.min_speed_px, motion.max_speed_px) * unit(rng->uniform(0.0, 2.0 * kPi));
    }
    for (std::size_t f = 0; f < frames; ++f) {
      OrientedBox box = env;
      box.cx += pos.x;
      box.cy += pos.y;
      if (!inside_image(box, spec.image_size, 0.0)) break;
      p.offsets.push_back(pos);
      p.boxes.push_back(box);
      pos = pos + vel;
      if (rng && motion.accel_sigma_px > 0.0) {
        vel = vel + Point{rng->normal(0.0, motion.accel_sigma_px),
                          rng->normal(0.0, motion.accel_sigma_px)};
      }
    }
    p.alive = p.offsets.size();
    return p;
  };
  auto collides = [&](const Path& a, const std::vector<Path>& others) {
    for (const Path& b : others) {
      const std::size_t n = std::min(a.alive, b.alive);
      for (std::size_t f = 0; f < n; ++f) {
        if (obb_intersection_area(inflate(a.boxes[f], 1.0), b.boxes[f]) > 0.0) return true;
      }
    }
    return false;
  };

  std::vector<Path> paths;
  std::vector<const SimTrunk*> kept;
  for (std::size_t i = 0; i < scene.trunks.size(); ++i) {
    const SimTrunk& t = scene.trunks[i];
    const OrientedBox env = trunk_envelope(t);
    std::optional<Path> chosen;
    for (std::uint64_t attempt = 0; attempt < 20 && !chosen; ++attempt) {
      Rng rng(spec.seed, {kTagMotion, i, attempt});
      Path p = make_path(env, &rng);
      if (!collides(p, paths)) chosen = std::move(p);
    }
    if (!chosen) {
      Path p = make_path(env, nullptr);
      if (collides(p, paths)) continue;
      chosen = std::move(p);
    }
    paths.push_back(std::move(*chosen));
    kept.push_back(&t);
  }

  std::vector<GroundTruthFrame> out(frames);
  for (std::size_t f = 0; f < frames; ++f) {
    GroundTruthFrame& frame = out[f];
    frame.frame_id = static_cast<std::int64_t>(f);
    frame.timestamp_s = static_cast<double>(f) / motion.frame_rate;
    frame.image_size = spec.image_size;
    for (std::size_t i = 0; i < kept.size(); ++i) {
      if (f >= paths[i].alive) continue;
      GroundTruthInstance inst;
      inst.trunk_id = kept[i]->id;
      for (const auto& [cls, ring] : trunk_polygons(translated(*kept[i], paths[i].offsets[f]))) {
        inst.components.emplace(cls, Contour(ring));
      }
      frame.instances.push_back(std::move(inst));
    }
    SceneParameters scene_params = spec.scene;
    scene_params.quantity = quantity_level(frame.instances.size());
    frame.scene = scene_params;
  }
  return out;
}

}  // namespace trunkfuse
