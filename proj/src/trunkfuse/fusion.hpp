// Copyright 2026 The trunkfuse Authors
// SPDX-License-Identifier: Apache-2.0

// Fusion of per-task detections (oriented boxes and instance contours) into
// unified trunks: task matching per class, component matching across
// classes, axis derivation and envelope construction.

#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "trunkfuse/model.hpp"

namespace trunkfuse {

enum class UnmatchedPolicy { kKeepAny, kRequireBoth };
enum class ConfidenceMerge { kMax, kMean };

struct FusionConfig {
  double confidence_threshold = 0.4;
  double task_match_min_iou = 0.1;
  double component_match_min_affinity = 0.25;
  UnmatchedPolicy unmatched_policy = UnmatchedPolicy::kKeepAny;
  ConfidenceMerge confidence_merge = ConfidenceMerge::kMax;

  // Throws InvalidConfig when a threshold leaves [0, 1].
  void validate() const;
};

struct TaskMatchResult {
  std::vector<ComponentInstance> matched;
  std::vector<std::size_t> unmatched_ood;   // indices into the OOD input
  std::vector<std::size_t> unmatched_iseg;  // indices into the ISEG input
};

// Detections of other classes are ignored. The confidence filter is the
// caller's responsibility.
TaskMatchResult match_tasks(std::span<const Detection> ood,
                            std::span<const Detection> iseg, ComponentClass cls,
                            const FusionConfig& cfg);

// Single-task component: OOD keeps its box, ISEG gets the minimum-area box of
// its contour.
ComponentInstance component_from_ood(const Detection& det, std::size_t index);
ComponentInstance component_from_iseg(const Detection& det, std::size_t index);

double cut_side_affinity(const ComponentInstance& cut, const ComponentInstance& side);
// Fraction of the bound's box edges lying inside the side box (best edge).
double bound_side_affinity(const ComponentInstance& bound,
                           const ComponentInstance& side);

struct ComponentGroup {
  std::optional<ComponentInstance> side;
  std::optional<ComponentInstance> cut;
  std::optional<ComponentInstance> bound;
};

std::vector<ComponentGroup> match_components(std::span<const ComponentInstance> cuts,
                                             std::span<const ComponentInstance> sides,
                                             std::span<const ComponentInstance> bounds,
                                             const FusionConfig& cfg);

struct Axis {
  std::array<Point, 2> endpoints{};
  std::optional<Point> cut_center;
};

// Center of a cut: ellipse fit of its contour when possible, else box center.
Point cut_center(const ComponentInstance& cut);
Axis derive_axis(const ComponentGroup& group);

UnifiedTrunk assemble_trunk(const ComponentGroup& group);

// Confidence filter, task matching, component matching, axis derivation.
// Output is sorted by envelope and independent of input order.
std::vector<UnifiedTrunk> fuse_frame(std::span<const Detection> ood,
                                     std::span<const Detection> iseg,
                                     const FusionConfig& cfg);
FusedFrame fuse_frame(const DetectionFrame& frame, const FusionConfig& cfg);

}  // namespace trunkfuse
