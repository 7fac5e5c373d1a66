// Copyright 2026 The trunkfuse Authors
// SPDX-License-Identifier: Apache-2.0

// Flat key = value configuration shared by every subcommand. Keys mirror the
// command line flags without their leading dashes.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "trunkfuse/annotation.hpp"
#include "trunkfuse/fusion.hpp"
#include "trunkfuse/mot_metrics.hpp"
#include "trunkfuse/simulate.hpp"
#include "trunkfuse/tracking.hpp"

namespace trunkfuse {

struct SimulationConfig {
  SceneParameters scene;
  ImageSize image_size{1280, 720};
  std::size_t trunks = 0;  // 0 draws from the quantity level
  std::size_t frames = 1;  // > 1 simulates one moving sequence
  std::size_t scenes = 1;  // > 1 simulates independent scenes
  bool truncation = true;
  MotionSpec motion;
};

struct Config {
  FusionConfig fusion;
  TrackerConfig tracker;
  NoiseModel noise;
  EvalOptions eval;
  AnnotationConfig annotation;
  SimulationConfig simulation;
  ExportVariant export_variant = ExportVariant::kThreeClass;
  double iou_thresh = 0.5;  // fused precision / recall on envelopes
  double sim_thresh = kDefaultSimThresh;
  std::uint64_t seed = 0;
  std::string overlay_dir;

  // Throws InvalidConfig for an unknown key or a malformed value.
  void set(const std::string& key, const std::string& value);
  std::string get(const std::string& key) const;
  // Lines are `key = value`; `#` starts a comment. Errors name path and line.
  void load_file(const std::filesystem::path& path);
  void validate() const;
  // Effective values of every key, in documentation order.
  std::vector<std::pair<std::string, std::string>> entries() const;

  static const std::vector<std::string>& keys();
};

SceneSpec scene_spec(const Config& cfg);

}  // namespace trunkfuse
