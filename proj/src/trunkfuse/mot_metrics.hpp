// Copyright 2026 The trunkfuse Authors
// SPDX-License-Identifier: Apache-2.0

// CLEAR-MOT and identity metrics computed from a per-frame event log.

#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "trunkfuse/metrics.hpp"

namespace trunkfuse {

inline constexpr double kDefaultSimThresh = 0.5;

struct MatchEvent {
  std::int64_t gt_id = 0;
  std::int64_t pred_id = 0;
  double similarity = 0.0;
  bool is_switch = false;
};

struct CandidatePair {
  std::int64_t gt_id = 0;
  std::int64_t pred_id = 0;
};

struct FrameEvents {
  std::int64_t frame_id = 0;
  int sequence = 0;
  std::vector<MatchEvent> matches;
  std::vector<std::int64_t> misses;
  std::vector<std::int64_t> false_positives;
  // Every (gt, pred) pair at or above the similarity threshold.
  std::vector<CandidatePair> candidates;
  std::size_t num_gt = 0;
  std::size_t num_pred = 0;
};

// Per-sequence event log. Object ids are scoped by sequence index, so
// accumulators of different sequences can be merged.
class MotAccumulator {
 public:
  explicit MotAccumulator(double sim_thresh = kDefaultSimThresh)
      : sim_thresh_(sim_thresh) {}

  // Starts a new sequence: correspondences do not carry over.
  void begin_sequence();

  // similarity is row-major, gt_ids.size() x pred_ids.size().
  void update(std::int64_t frame_id, std::span<const std::int64_t> gt_ids,
              std::span<const std::int64_t> pred_ids, std::span<const double> similarity);

  // Appends other's sequences after this one's.
  void merge(const MotAccumulator& other);
  MotAccumulator subset(std::span<const std::size_t> frame_indices) const;

  const std::vector<FrameEvents>& frames() const { return frames_; }
  int sequence_count() const { return sequences_; }
  double sim_thresh() const { return sim_thresh_; }

 private:
  double sim_thresh_;
  int sequences_ = 0;
  std::vector<FrameEvents> frames_;
  std::map<std::int64_t, std::int64_t> last_match_;  // gt -> pred
};

struct ClearMot {
  double mota = 0.0;
  bool mota_undefined = false;
  double mean_similarity = 0.0;  // mean IoU_c over matches
  bool mean_similarity_undefined = false;
  std::size_t num_frames = 0;
  std::size_t num_gt = 0;
  std::size_t num_pred = 0;
  std::size_t matches = 0;
  std::size_t misses = 0;
  std::size_t false_positives = 0;
  std::size_t switches = 0;
  std::size_t fragmentations = 0;
  std::size_t num_objects = 0;
  std::size_t mostly_tracked = 0;
  std::size_t partially_tracked = 0;
  std::size_t mostly_lost = 0;
};

struct IdMetrics {
  double idf1 = 0.0;
  double idp = 0.0;
  double idr = 0.0;
  bool idf1_undefined = false;
  bool idp_undefined = false;
  bool idr_undefined = false;
  std::size_t idtp = 0;
  std::size_t idfp = 0;
  std::size_t idfn = 0;
};

ClearMot clear_mot(const MotAccumulator& acc);
IdMetrics id_metrics(const MotAccumulator& acc);

// Builds the event log of one sequence with IoU_c similarity. Instances with
// trunk id 0 are not tracking targets and are skipped. Frame ids of both
// sequences must agree, else FrameMismatch.
MotAccumulator accumulate_sequence(std::span<const GroundTruthFrame> gts,
                                   std::span<const TrackedFrame> preds,
                                   double sim_thresh = kDefaultSimThresh,
                                   const EvalOptions& opts = {});

ClearMot clear_mot(std::span<const GroundTruthFrame> gts,
                   std::span<const TrackedFrame> preds,
                   double sim_thresh = kDefaultSimThresh, const EvalOptions& opts = {});
IdMetrics id_metrics(std::span<const GroundTruthFrame> gts,
                     std::span<const TrackedFrame> preds,
                     double sim_thresh = kDefaultSimThresh, const EvalOptions& opts = {});

}  // namespace trunkfuse
