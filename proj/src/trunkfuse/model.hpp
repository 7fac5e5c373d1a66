// Copyright 2026 The trunkfuse Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "trunkfuse/geometry.hpp"

namespace trunkfuse {

// Trunk appears only in merged ground-truth exports, never as a raw
// component detection.
enum class ComponentClass { kSide, kCut, kBound, kTrunk };
enum class TaskSource { kOod, kIseg };
enum class Intensity { kLow, kMid, kHigh };

inline constexpr std::array<ComponentClass, 3> kComponentClasses = {
    ComponentClass::kSide, ComponentClass::kCut, ComponentClass::kBound};
inline constexpr std::array<Intensity, 3> kIntensities = {
    Intensity::kLow, Intensity::kMid, Intensity::kHigh};

std::string_view to_string(ComponentClass c);
std::string_view to_string(TaskSource s);
std::string_view to_string(Intensity i);
std::optional<ComponentClass> parse_component_class(std::string_view s);
std::optional<TaskSource> parse_task_source(std::string_view s);
std::optional<Intensity> parse_intensity(std::string_view s);

struct Detection {
  ComponentClass cls = ComponentClass::kSide;
  double confidence = 0.0;
  std::optional<OrientedBox> obb;
  std::optional<Contour> contour;
  TaskSource source = TaskSource::kOod;
};

struct DetectionFrame {
  std::int64_t frame_id = 0;
  double timestamp_s = 0.0;
  std::vector<Detection> detections;
};

struct SceneParameters {
  Intensity entropy = Intensity::kLow;
  Intensity quantity = Intensity::kLow;
  Intensity distance = Intensity::kLow;
  Intensity irregularity = Intensity::kLow;
  bool snow = false;
  friend bool operator==(const SceneParameters&, const SceneParameters&) = default;
};

// Minimum trunk counts implied by the quantity label.
inline constexpr std::size_t kMidQuantityMin = 8;
inline constexpr std::size_t kHighQuantityMin = 30;

struct ImageSize {
  int width = 0;
  int height = 0;
  friend bool operator==(const ImageSize&, const ImageSize&) = default;
};

// trunk_id 0 is reserved for live trees and rooted stumps.
struct GroundTruthInstance {
  std::int64_t trunk_id = 0;
  std::map<ComponentClass, Contour> components;
};

struct GroundTruthFrame {
  std::int64_t frame_id = 0;
  double timestamp_s = 0.0;
  std::optional<SceneParameters> scene;
  std::optional<ImageSize> image_size;
  std::vector<GroundTruthInstance> instances;
};

struct ComponentInstance {
  ComponentClass cls = ComponentClass::kSide;
  OrientedBox obb;
  std::optional<Contour> contour;
  double confidence = 0.0;
  // Indices into the fused frame's input lists; not serialized.
  std::optional<std::size_t> ood_index;
  std::optional<std::size_t> iseg_index;
};

struct UnifiedTrunk {
  std::optional<ComponentInstance> side;
  std::optional<ComponentInstance> cut;
  std::optional<ComponentInstance> bound;
  OrientedBox envelope;
  std::array<Point, 2> endpoints{};
  std::optional<Point> cut_center;
  double confidence = 0.0;

  const std::optional<ComponentInstance>& component(ComponentClass c) const;
  std::optional<ComponentInstance>& component(ComponentClass c);
  std::size_t component_count() const;
};

struct FusedFrame {
  std::int64_t frame_id = 0;
  double timestamp_s = 0.0;
  std::vector<UnifiedTrunk> trunks;
};

struct TrackedTrunk {
  std::int64_t track_id = 0;
  UnifiedTrunk trunk;
  // Position of the trunk in the tracker step's input; not serialized.
  std::size_t input_index = 0;
};

struct TrackedFrame {
  std::int64_t frame_id = 0;
  double timestamp_s = 0.0;
  std::vector<TrackedTrunk> tracks;
};

enum class PrimitiveKind { kEdge, kSectionLine, kSectionAreaPoints, kAreaMarker };

std::string_view to_string(PrimitiveKind k);
std::optional<PrimitiveKind> parse_primitive_kind(std::string_view s);

struct PointPrimitive {
  PrimitiveKind kind = PrimitiveKind::kEdge;
  std::vector<Point> points;
  std::int64_t trunk_id = 0;
};

struct AnnotationFrame {
  std::int64_t frame_id = 0;
  double timestamp_s = 0.0;
  std::optional<SceneParameters> scene;
  std::optional<ImageSize> image_size;
  std::vector<PointPrimitive> primitives;
};

// Invariant checks. Each throws Error(kSchemaError) naming the field.
void validate(const Detection& det, const std::string& field);
void validate(const GroundTruthFrame& frame, bool check_quantity = true);
void validate(const PointPrimitive& prim, const std::string& field);
void validate_scene_quantity(const SceneParameters& scene, std::size_t trunks,
                             const std::string& field);

}  // namespace trunkfuse
