// Copyright 2026 The trunkfuse Authors
// SPDX-License-Identifier: Apache-2.0

#include "trunkfuse/annotation.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "trunkfuse/error.hpp"
#include "trunkfuse/polygon_ops.hpp"

namespace trunkfuse {

namespace {

struct TrunkPrimitives {
  std::vector<const PointPrimitive*> edges;
  std::vector<const PointPrimitive*> section_lines;
  std::vector<const PointPrimitive*> section_areas;
  std::vector<Point> markers;
};

struct SidePair {
  std::vector<Point> first;
  std::vector<Point> second;  // oriented to run alongside `first`
  Ring quad;
};

std::string trunk_label(std::int64_t id) { return "trunk " + std::to_string(id); }

SidePair pair_edges(std::vector<Point> a, std::vector<Point> b) {
  const double keep = distance(a.front(), b.front()) + distance(a.back(), b.back());
  const double flip = distance(a.front(), b.back()) + distance(a.back(), b.front());
  if (flip < keep) std::reverse(b.begin(), b.end());
  SidePair p;
  p.quad = a;
  p.quad.insert(p.quad.end(), b.rbegin(), b.rend());
  p.first = std::move(a);
  p.second = std::move(b);
  return p;
}

bool inside_any(Point p, const std::map<ComponentClass, Contour>& comps) {
  for (const auto& [cls, c] : comps) {
    if (point_in_polygon(p, c.vertices())) return true;
  }
  return false;
}

Ring subtract(const Ring& base, const Ring& cutter, const std::string& what,
              std::vector<std::string>& warnings) {
  if (polygon_intersection_area(base, cutter) <= 0.0) return base;
  PolygonSet parts = polygon_difference(base, cutter);
  if (parts.outers.empty()) {
    throw Error(ErrorCode::kSelfIntersection, what + ": nothing left after subtraction");
  }
  if (parts.outers.size() > 1) {
    warnings.push_back(what + ": split into " + std::to_string(parts.outers.size()) +
                       " parts, keeping the largest");
  }
  return parts.outers[largest_ring(parts)];
}

Contour cut_polygon(const PointPrimitive& area, const AnnotationConfig& cfg,
                    std::optional<Ellipse>& fitted) {
  try {
    const EllipseFit fit = fit_ellipse(area.points);
    const Ellipse& e = fit.ellipse;
    const double mean_radius = 0.5 * (e.semi_major + e.semi_minor);
    if (fit.rms_residual <= cfg.ellipse_residual_frac * mean_radius) {
      fitted = e;
      const double a = e.semi_major;
      const double b = e.semi_minor;
      // Ramanujan perimeter, about one vertex per pixel.
      const double perimeter =
          kPi * (3.0 * (a + b) - std::sqrt((3.0 * a + b) * (a + 3.0 * b)));
      const auto n = static_cast<std::size_t>(
          std::clamp(std::ceil(perimeter), 32.0, 720.0));
      return Contour(ellipse_polygon(e, n));
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kNotAnEllipse) throw;
  }
  fitted.reset();
  return Contour(sample_closed_spline(area.points, cfg.spline_density));
}

void check_width(const Contour& c, std::int64_t id, ComponentClass cls,
                 const AnnotationConfig& cfg, std::vector<std::string>& warnings) {
  const OrientedBox box = min_area_obb(c.vertices());
  if (box.height < cfg.min_width_px) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s %s: width %.1f px is below %.1f px",
                  trunk_label(id).c_str(), std::string(to_string(cls)).c_str(), box.height,
                  cfg.min_width_px);
    warnings.emplace_back(buf);
  }
}

DerivedTrunk derive_trunk(std::int64_t id, const TrunkPrimitives& prims,
                          const AnnotationConfig& cfg, std::vector<std::string>& warnings) {
  const std::string label = trunk_label(id);
  if (prims.edges.empty() && prims.section_areas.empty()) {
    throw Error(ErrorCode::kSchemaError, label + ": needs an edge or a section area");
  }
  DerivedTrunk out;
  out.trunk_id = id;

  std::vector<std::vector<Point>> curves;
  for (const PointPrimitive* e : prims.edges) {
    curves.push_back(sample_spline(e->points, cfg.spline_density));
  }

  std::optional<SidePair> side;
  if (curves.size() == 1) {
    if (prims.section_areas.empty()) {
      throw Error(ErrorCode::kUnpairedEdge, label + ": single edge without a partner");
    }
    warnings.push_back(label + ": single edge ignored");
  } else if (curves.size() == 2) {
    side = pair_edges(curves[0], curves[1]);
  } else if (curves.size() > 2) {
    // The smallest pair region holding a marker.
    double best_area = 0.0;
    for (std::size_t i = 0; i < curves.size(); ++i) {
      for (std::size_t j = i + 1; j < curves.size(); ++j) {
        SidePair p = pair_edges(curves[i], curves[j]);
        if (!is_simple_polygon(p.quad)) continue;
        const double area = std::abs(signed_area(p.quad));
        if (side && area >= best_area) continue;
        for (Point m : prims.markers) {
          if (point_in_polygon(m, p.quad)) {
            side = std::move(p);
            best_area = area;
            break;
          }
        }
      }
    }
    if (!side) {
      throw Error(ErrorCode::kUnpairedEdge,
                  label + ": " + std::to_string(curves.size()) +
                      " edges and no marker selects a pair");
    }
    warnings.push_back(label + ": " + std::to_string(curves.size() - 2) +
                       " surplus edges ignored");
  }
  if (side && !is_simple_polygon(side->quad)) {
    throw Error(ErrorCode::kSelfIntersection, label + " side: edges cross each other");
  }
  if (side && prims.markers.empty()) {
    warnings.push_back(label + ": no area marker");
  }

  if (!prims.section_areas.empty()) {
    if (prims.section_areas.size() > 1) {
      warnings.push_back(label + ": extra section areas ignored");
    }
    out.components.emplace(ComponentClass::kCut,
                           cut_polygon(*prims.section_areas.front(), cfg, out.cut_ellipse));
  }

  if (!prims.section_lines.empty()) {
    if (prims.section_lines.size() > 1) {
      warnings.push_back(label + ": extra section lines ignored");
    }
    Ring bound = sample_spline(prims.section_lines.front()->points, cfg.spline_density);
    if (side) {
      // Close against the side end nearer to the section line.
      const Point mid = bound[bound.size() / 2];
      const Point s0 = side->first.front();
      const Point s1 = side->second.front();
      const Point t0 = side->first.back();
      const Point t1 = side->second.back();
      const bool start_end = distance(mid, 0.5 * (s0 + s1)) <= distance(mid, 0.5 * (t0 + t1));
      Point c0 = start_end ? s0 : t0;
      Point c1 = start_end ? s1 : t1;
      if (distance(bound.front(), c1) + distance(bound.back(), c0) <
          distance(bound.front(), c0) + distance(bound.back(), c1)) {
        std::swap(c0, c1);
      }
      if (distance(bound.back(), c1) > 0.5) bound.push_back(c1);
      if (distance(bound.front(), c0) > 0.5) bound.insert(bound.begin(), c0);
    } else {
      warnings.push_back(label + ": section line closed by its chord");
    }
    out.components.emplace(ComponentClass::kBound, Contour(bound));
  }

  if (side) {
    Ring ring = side->quad;
    if (auto it = out.components.find(ComponentClass::kCut); it != out.components.end()) {
      ring = subtract(ring, it->second.vertices(), label + " side", warnings);
    }
    if (auto it = out.components.find(ComponentClass::kBound); it != out.components.end()) {
      ring = subtract(ring, it->second.vertices(), label + " side", warnings);
    }
    out.components.emplace(ComponentClass::kSide, Contour(ring));
  }

  for (const auto& [cls, c] : out.components) check_width(c, id, cls, cfg, warnings);
  for (Point m : prims.markers) {
    if (!inside_any(m, out.components)) {
      char buf[96];
      std::snprintf(buf, sizeof buf, ": area marker (%.1f, %.1f) lies outside", m.x, m.y);
      throw Error(ErrorCode::kMarkerOutsideRegion,
                  label + buf + " every derived component");
    }
  }
  return out;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

DerivedComponents derive_components(std::span<const PointPrimitive> primitives,
                                    const AnnotationConfig& cfg) {
  std::map<std::int64_t, TrunkPrimitives> by_trunk;
  for (std::size_t i = 0; i < primitives.size(); ++i) {
    const PointPrimitive& p = primitives[i];
    validate(p, "primitives[" + std::to_string(i) + "]");
    TrunkPrimitives& t = by_trunk[p.trunk_id];
    switch (p.kind) {
      case PrimitiveKind::kEdge: t.edges.push_back(&p); break;
      case PrimitiveKind::kSectionLine: t.section_lines.push_back(&p); break;
      case PrimitiveKind::kSectionAreaPoints: t.section_areas.push_back(&p); break;
      case PrimitiveKind::kAreaMarker: t.markers.push_back(p.points.front()); break;
    }
  }
  DerivedComponents out;
  for (const auto& [id, prims] : by_trunk) {
    out.trunks.push_back(derive_trunk(id, prims, cfg, out.warnings));
  }
  return out;
}

std::string_view to_string(ExportVariant v) {
  switch (v) {
    case ExportVariant::kThreeClass: return "three-class";
    case ExportVariant::kTwoClass: return "two-class";
    case ExportVariant::kSingleTrunk: return "single-trunk";
  }
  return "?";
}

std::optional<ExportVariant> parse_export_variant(std::string_view s) {
  const std::string v = lower(s);
  if (v == "three-class") return ExportVariant::kThreeClass;
  if (v == "two-class") return ExportVariant::kTwoClass;
  if (v == "single-trunk") return ExportVariant::kSingleTrunk;
  return std::nullopt;
}

ExportResult export_ground_truth(const DerivedComponents& components, ExportVariant variant,
                                 const GroundTruthFrame& header) {
  ExportResult out;
  out.frame = header;
  out.frame.instances.clear();
  for (const DerivedTrunk& t : components.trunks) {
    GroundTruthInstance inst;
    inst.trunk_id = t.trunk_id;
    if (variant == ExportVariant::kSingleTrunk) {
      std::vector<Ring> rings;
      for (const auto& [cls, c] : t.components) rings.push_back(c.vertices());
      PolygonSet merged = polygon_union(rings);
      if (merged.outers.empty()) continue;
      if (merged.outers.size() > 1) {
        out.warnings.push_back(trunk_label(t.trunk_id) + ": union has " +
                               std::to_string(merged.outers.size()) +
                               " parts, keeping the largest");
      }
      inst.components.emplace(ComponentClass::kTrunk,
                              Contour(merged.outers[largest_ring(merged)]));
    } else {
      for (const auto& [cls, c] : t.components) {
        if (variant == ExportVariant::kTwoClass && cls == ComponentClass::kBound) continue;
        inst.components.emplace(cls, c);
      }
    }
    if (inst.components.empty()) continue;
    for (const auto& [cls, c] : inst.components) {
      out.targets.push_back({inst.trunk_id, cls, min_area_obb(c.vertices())});
    }
    out.frame.instances.push_back(std::move(inst));
  }
  return out;
}

}  // namespace trunkfuse
