// Copyright 2026 The trunkfuse Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "trunkfuse/model.hpp"
#include "trunkfuse/raster.hpp"

namespace trunkfuse {

enum class OverlapKind { kMaskIoU, kObbIoU, kComponentIoU };

struct MatchScore {
  double value = 0.0;
  OverlapKind kind = OverlapKind::kMaskIoU;
};

using LabeledMasks = std::map<ComponentClass, Mask>;

// Polygon of a predicted component: its contour when present, else its box.
std::vector<Point> component_polygon(const ComponentInstance& c);

LabeledMasks rasterize_instance(const GroundTruthInstance& gt, const RasterGrid& grid);
LabeledMasks rasterize_trunk(const UnifiedTrunk& pred, const RasterGrid& grid);

// Sum of per-label intersections over sum of per-label unions, over every
// label present on either side. Throws EmptyInstances when both are empty.
double iou_c(const LabeledMasks& gt, const LabeledMasks& pred);
double iou_c(const GroundTruthInstance& gt, const UnifiedTrunk& pred,
             const RasterGrid& grid);

// All vertices, for sizing a normalized grid.
void append_points(const GroundTruthInstance& gt, std::vector<Point>& out);
void append_points(const UnifiedTrunk& t, std::vector<Point>& out);

// ---- COCO-style average precision -------------------------------------------

// Detections and ground truth of one class in one image. overlaps is
// row-major, scores.size() x num_gt.
struct EvalImage {
  std::vector<double> scores;
  std::size_t num_gt = 0;
  std::vector<double> overlaps;
};

inline constexpr std::size_t kIouThresholdCount = 10;
double iou_threshold(std::size_t k);  // 0.50, 0.55, ..., 0.95

// 101-point interpolated AP at one IoU threshold; requires some ground truth.
double average_precision(std::span<const EvalImage> images, double threshold);

struct ApResult {
  std::array<double, kIouThresholdCount> per_threshold{};
  double ap = 0.0;  // mean over thresholds
  bool undefined = false;
  std::size_t num_gt = 0;
  std::size_t num_det = 0;
};

ApResult ap_50_95(std::span<const EvalImage> images);

struct MapTable {
  std::vector<std::pair<std::string, ApResult>> per_class;
  double mean = 0.0;  // over classes with ground truth
  bool undefined = false;
  std::vector<std::string> notes;
};

MapTable mean_over_classes(std::vector<std::pair<std::string, ApResult>> per_class);

struct EvalOptions {
  int raster_size = kDefaultRasterSize;
  int threads = 1;
};

// Per-class AP of raw detections from one task. OOD detections are scored
// by box IoU against the ground-truth contour's minimum-area box, ISEG
// detections by mask IoU.
MapTable map_50_95(std::span<const DetectionFrame> preds,
                   std::span<const GroundTruthFrame> gts, TaskSource task,
                   OverlapKind overlap, const EvalOptions& opts = {});
// Fused trunks scored as a single class with component-wise IoU.
MapTable map_50_95_fused(std::span<const FusedFrame> preds,
                         std::span<const GroundTruthFrame> gts,
                         const EvalOptions& opts = {});

// Instances sharing a positive trunk id are one trunk; id 0 instances stay
// separate.
std::vector<GroundTruthInstance> trunk_instances(const GroundTruthFrame& frame);

// ---- Fused precision / recall ----------------------------------------------

// Envelope of the components' minimum-area boxes, built the way fusion
// builds trunk envelopes.
OrientedBox gt_envelope(const GroundTruthInstance& gt);

struct PrResult {
  std::size_t true_positives = 0;
  std::size_t num_pred = 0;
  std::size_t num_gt = 0;
  double precision = 0.0;
  double recall = 0.0;
  bool precision_undefined = false;
  bool recall_undefined = false;
};

PrResult fused_pr(std::span<const FusedFrame> preds,
                  std::span<const GroundTruthFrame> gts, double iou_thresh = 0.5);

// Pairs each fused frame with its ground truth by frame id; frames missing
// from the predictions are treated as empty. Throws FrameMismatch for a
// prediction frame with no ground truth.
template <typename Frame>
std::vector<const Frame*> align_frames(std::span<const Frame> preds,
                                       std::span<const GroundTruthFrame> gts);

// ---- Stratification -------------------------------------------------------

struct Stratum {
  std::string parameter;  // entropy | quantity | distance | irregularity | snow
  std::string level;      // low | mid | high | true | false
  std::vector<std::size_t> frames;
  std::size_t instances = 0;
};

// One stratum per (parameter, level), each parameter partitioning the
// frames. Throws MissingSceneParameters.
std::vector<Stratum> stratify(std::span<const GroundTruthFrame> gts);

// Runs fn(i) for i in [0, n) on up to `threads` threads.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace trunkfuse
