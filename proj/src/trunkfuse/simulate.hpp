// Copyright 2026 The trunkfuse Authors
// SPDX-License-Identifier: Apache-2.0

// Synthetic scenes of capsule-shaped trunks with known components and ids,
// point annotations drawn from the same shapes, and a noise model that turns
// ground truth into pseudo-detections.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "trunkfuse/model.hpp"
#include "trunkfuse/polygon_ops.hpp"

namespace trunkfuse {

struct SceneSpec {
  SceneParameters scene;
  ImageSize image_size{1280, 720};
  std::uint64_t seed = 0;
  // Drawn from the quantity level's range when unset.
  std::optional<std::size_t> trunk_count;
  bool allow_truncation = true;

  void validate() const;  // throws InvalidSpec
};

// Trunk in image coordinates. The spine runs from the bound end to the cut
// end; the cut is an ellipse centered on the last spine point.
struct SimTrunk {
  std::int64_t id = 0;
  std::vector<Point> spine;
  double radius = 0.0;
  double cut_depth = 0.0;    // cut semi-axis along the spine
  double bound_depth = 0.0;  // bound semi-axis along the spine
};

// Untruncated Side, Cut and Bound polygons. They partition the trunk.
std::map<ComponentClass, Ring> trunk_polygons(const SimTrunk& t);
Ellipse cut_ellipse(const SimTrunk& t);
// Two edges, a section area, a section line and one marker.
std::vector<PointPrimitive> trunk_annotations(const SimTrunk& t);
SimTrunk translated(const SimTrunk& t, Point offset);
OrientedBox trunk_envelope(const SimTrunk& t);

struct SimScene {
  GroundTruthFrame frame;
  std::vector<SimTrunk> trunks;  // ascending id, id = index + 1
  std::vector<bool> truncated;
};

SimScene gen_scene_model(const SceneSpec& spec);
GroundTruthFrame gen_scene(const SceneSpec& spec);
AnnotationFrame gen_annotations(const SimScene& scene);

struct NoiseModel {
  double position_jitter_px = 0.0;
  double size_jitter_frac = 0.0;
  double angle_jitter_rad = 0.0;
  double dropout_prob = 0.0;
  double clutter_rate = 0.0;  // false positives per frame
  double confidence_tp = 0.9;
  double confidence_fp = 0.3;
  double confidence_sigma = 0.0;

  void validate() const;  // throws InvalidConfig
};

struct Correspondence {
  std::int64_t trunk_id = 0;
  ComponentClass cls = ComponentClass::kSide;
  std::optional<std::size_t> ood_index;
  std::optional<std::size_t> iseg_index;
};

struct PerturbedDetections {
  std::vector<Detection> ood;
  std::vector<Detection> iseg;
  std::vector<Correspondence> correspondences;
  std::size_t clutter = 0;

  // OOD detections first, then ISEG, so per-task indices are preserved.
  DetectionFrame to_frame(std::int64_t frame_id, double timestamp_s) const;
};

PerturbedDetections perturb_detections(const GroundTruthFrame& gt, const NoiseModel& noise,
                                       std::uint64_t seed);

struct MotionSpec {
  double min_speed_px = 0.5;  // per frame
  double max_speed_px = 3.0;
  double accel_sigma_px = 0.0;
  double frame_rate = 30.0;

  void validate() const;  // throws InvalidSpec
};

// Trunks leave the sequence on first contact with the image border and are
// not replaced. Truncation is disabled.
std::vector<GroundTruthFrame> gen_sequence(const SceneSpec& spec, std::size_t frames,
                                           const MotionSpec& motion);

}  // namespace trunkfuse
