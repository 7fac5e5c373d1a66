// Copyright 2026 The trunkfuse Authors
// SPDX-License-Identifier: Apache-2.0

#include "trunkfuse/model.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <utility>

#include "trunkfuse/error.hpp"

namespace trunkfuse {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

[[noreturn]] void schema_error(const std::string& field, const std::string& what) {
  throw Error(ErrorCode::kSchemaError, field + ": " + what);
}

}  // namespace

std::string_view to_string(ComponentClass c) {
  switch (c) {
    case ComponentClass::kSide: return "side";
    case ComponentClass::kCut: return "cut";
    case ComponentClass::kBound: return "bound";
    case ComponentClass::kTrunk: return "trunk";
  }
  return "?";
}

std::string_view to_string(TaskSource s) {
  return s == TaskSource::kOod ? "ood" : "iseg";
}

std::string_view to_string(Intensity i) {
  switch (i) {
    case Intensity::kLow: return "low";
    case Intensity::kMid: return "mid";
    case Intensity::kHigh: return "high";
  }
  return "?";
}

std::string_view to_string(PrimitiveKind k) {
  switch (k) {
    case PrimitiveKind::kEdge: return "edge";
    case PrimitiveKind::kSectionLine: return "section_line";
    case PrimitiveKind::kSectionAreaPoints: return "section_area";
    case PrimitiveKind::kAreaMarker: return "area_marker";
  }
  return "?";
}

std::optional<ComponentClass> parse_component_class(std::string_view s) {
  const std::string v = lower(s);
  if (v == "side") return ComponentClass::kSide;
  if (v == "cut") return ComponentClass::kCut;
  if (v == "bound") return ComponentClass::kBound;
  if (v == "trunk") return ComponentClass::kTrunk;
  return std::nullopt;
}

std::optional<TaskSource> parse_task_source(std::string_view s) {
  const std::string v = lower(s);
  if (v == "ood") return TaskSource::kOod;
  if (v == "iseg") return TaskSource::kIseg;
  return std::nullopt;
}

std::optional<Intensity> parse_intensity(std::string_view s) {
  const std::string v = lower(s);
  if (v == "low") return Intensity::kLow;
  if (v == "mid") return Intensity::kMid;
  if (v == "high") return Intensity::kHigh;
  return std::nullopt;
}

std::optional<PrimitiveKind> parse_primitive_kind(std::string_view s) {
  const std::string v = lower(s);
  if (v == "edge") return PrimitiveKind::kEdge;
  if (v == "section_line") return PrimitiveKind::kSectionLine;
  if (v == "section_area") return PrimitiveKind::kSectionAreaPoints;
  if (v == "area_marker") return PrimitiveKind::kAreaMarker;
  return std::nullopt;
}

const std::optional<ComponentInstance>& UnifiedTrunk::component(
    ComponentClass c) const {
  switch (c) {
    case ComponentClass::kSide: return side;
    case ComponentClass::kCut: return cut;
    default: return bound;
  }
}

std::optional<ComponentInstance>& UnifiedTrunk::component(ComponentClass c) {
  return const_cast<std::optional<ComponentInstance>&>(
      std::as_const(*this).component(c));
}

std::size_t UnifiedTrunk::component_count() const {
  return static_cast<std::size_t>(side.has_value()) + cut.has_value() +
         bound.has_value();
}

void validate(const Detection& det, const std::string& field) {
  if (det.cls == ComponentClass::kTrunk) {
    schema_error(field + ".class", "'trunk' is not a component detection class");
  }
  if (!(det.confidence >= 0.0 && det.confidence <= 1.0)) {
    schema_error(field + ".confidence",
                 "value " + std::to_string(det.confidence) + " outside [0, 1]");
  }
  if (!det.obb && !det.contour) {
    schema_error(field, "detection carries neither obb nor contour");
  }
  if (det.source == TaskSource::kOod && !det.obb) {
    schema_error(field + ".obb", "ood detection requires an obb");
  }
  if (det.source == TaskSource::kIseg && !det.contour) {
    schema_error(field + ".contour", "iseg detection requires a contour");
  }
  if (det.obb && !is_canonical(*det.obb)) {
    schema_error(field + ".obb", "box is not in canonical form");
  }
}

void validate_scene_quantity(const SceneParameters& scene, std::size_t trunks,
                             const std::string& field) {
  if (scene.quantity == Intensity::kMid && trunks < kMidQuantityMin) {
    schema_error(field + ".quantity", "'mid' requires at least 8 trunks, frame has " +
                                          std::to_string(trunks));
  }
  if (scene.quantity == Intensity::kHigh && trunks < kHighQuantityMin) {
    schema_error(field + ".quantity", "'high' requires at least 30 trunks, frame has " +
                                          std::to_string(trunks));
  }
}

void validate(const GroundTruthFrame& frame, bool check_quantity) {
  std::set<std::pair<std::int64_t, ComponentClass>> seen;
  for (std::size_t i = 0; i < frame.instances.size(); ++i) {
    const auto& inst = frame.instances[i];
    const std::string field = "instances[" + std::to_string(i) + "]";
    if (inst.trunk_id < 0) {
      schema_error(field + ".trunk_id", "must be >= 0");
    }
    if (inst.components.empty()) {
      schema_error(field + ".components", "instance has no component masks");
    }
    for (const auto& [cls, contour] : inst.components) {
      if (contour.size() < 3) {
        schema_error(field + ".components." + std::string(to_string(cls)),
                     "contour needs at least 3 vertices");
      }
      // Live trees share id 0, so only positive ids must be unique.
      if (inst.trunk_id > 0 && !seen.emplace(inst.trunk_id, cls).second) {
        schema_error(field + ".components." + std::string(to_string(cls)),
                     "duplicate (trunk_id=" + std::to_string(inst.trunk_id) +
                         ", " + std::string(to_string(cls)) + ") in frame");
      }
    }
  }
  if (check_quantity && frame.scene) {
    validate_scene_quantity(*frame.scene, frame.instances.size(), "scene");
  }
}

void validate(const PointPrimitive& prim, const std::string& field) {
  if (prim.trunk_id < 0) schema_error(field + ".trunk_id", "must be >= 0");
  const std::size_t n = prim.points.size();
  switch (prim.kind) {
    case PrimitiveKind::kEdge:
    case PrimitiveKind::kSectionLine:
      if (n < 2) schema_error(field + ".points", "needs at least 2 points");
      break;
    case PrimitiveKind::kSectionAreaPoints:
      if (n < 5) schema_error(field + ".points", "needs at least 5 points");
      break;
    case PrimitiveKind::kAreaMarker:
      if (n != 1) schema_error(field + ".points", "needs exactly 1 point");
      break;
  }
}

}  // namespace trunkfuse
