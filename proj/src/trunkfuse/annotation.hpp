// Copyright 2026 The trunkfuse Authors
// SPDX-License-Identifier: Apache-2.0

// Turns sparse point annotations (lateral edges, section lines, section
// area points, area markers) into per-trunk component polygons and exports
// them as ground truth for the different class layouts.

#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "trunkfuse/model.hpp"

namespace trunkfuse {

struct AnnotationConfig {
  double spline_density = 0.5;  // samples per pixel of chord
  // Section areas whose ellipse fit residual exceeds this fraction of the
  // mean radius become closed splines.
  double ellipse_residual_frac = 0.02;
  double min_width_px = 8.0;
};

struct DerivedTrunk {
  std::int64_t trunk_id = 0;
  std::map<ComponentClass, Contour> components;
  std::optional<Ellipse> cut_ellipse;  // set when the cut is a fitted ellipse
};

struct DerivedComponents {
  std::vector<DerivedTrunk> trunks;  // ascending trunk id
  std::vector<std::string> warnings;
};

// Errors: UnpairedEdge, MarkerOutsideRegion, SelfIntersection.
DerivedComponents derive_components(std::span<const PointPrimitive> primitives,
                                    const AnnotationConfig& cfg = {});

enum class ExportVariant { kThreeClass, kTwoClass, kSingleTrunk };

std::string_view to_string(ExportVariant v);
std::optional<ExportVariant> parse_export_variant(std::string_view s);

struct ObbTarget {
  std::int64_t trunk_id = 0;
  ComponentClass cls = ComponentClass::kSide;
  OrientedBox obb;
};

struct ExportResult {
  GroundTruthFrame frame;
  std::vector<ObbTarget> targets;
  std::vector<std::string> warnings;
};

// `header` supplies frame id, timestamp, scene and image size; its instances
// are replaced.
ExportResult export_ground_truth(const DerivedComponents& components, ExportVariant variant,
                                 const GroundTruthFrame& header);

}  // namespace trunkfuse
