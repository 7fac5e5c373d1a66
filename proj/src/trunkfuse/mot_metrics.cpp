// Copyright 2026 The trunkfuse Authors
// SPDX-License-Identifier: Apache-2.0

#include "trunkfuse/mot_metrics.hpp"

#include <algorithm>
#include <set>
#include <tuple>

#include "trunkfuse/assignment.hpp"
#include "trunkfuse/error.hpp"

namespace trunkfuse {

namespace {

using ObjectKey = std::pair<int, std::int64_t>;

struct ObjectTrace {
  std::size_t present = 0;
  std::size_t tracked = 0;
  std::vector<bool> history;  // tracked flag per frame the object is present
};

}  // namespace

void MotAccumulator::begin_sequence() {
  ++sequences_;
  last_match_.clear();
}

void MotAccumulator::update(std::int64_t frame_id, std::span<const std::int64_t> gt_ids,
                            std::span<const std::int64_t> pred_ids,
                            std::span<const double> similarity) {
  if (sequences_ == 0) begin_sequence();
  const std::size_t ng = gt_ids.size();
  const std::size_t np = pred_ids.size();
  auto valid = [&](std::size_t g, std::size_t p) {
    return similarity[g * np + p] >= sim_thresh_;
  };

  FrameEvents ev;
  ev.frame_id = frame_id;
  ev.sequence = sequences_ - 1;
  ev.num_gt = ng;
  ev.num_pred = np;
  for (std::size_t g = 0; g < ng; ++g) {
    for (std::size_t p = 0; p < np; ++p) {
      if (valid(g, p)) ev.candidates.push_back({gt_ids[g], pred_ids[p]});
    }
  }

  std::vector<bool> gt_done(ng, false);
  std::vector<bool> pred_done(np, false);
  std::vector<std::tuple<std::size_t, std::size_t, bool>> matched;

  // Correspondences from earlier frames survive while still valid.
  for (std::size_t g = 0; g < ng; ++g) {
    auto it = last_match_.find(gt_ids[g]);
    if (it == last_match_.end()) continue;
    for (std::size_t p = 0; p < np; ++p) {
      if (pred_ids[p] == it->second && !pred_done[p] && valid(g, p)) {
        gt_done[g] = pred_done[p] = true;
        matched.emplace_back(g, p, false);
        break;
      }
    }
  }

  std::vector<std::size_t> rows;
  std::vector<std::size_t> cols;
  for (std::size_t g = 0; g < ng; ++g) {
    if (!gt_done[g]) rows.push_back(g);
  }
  for (std::size_t p = 0; p < np; ++p) {
    if (!pred_done[p]) cols.push_back(p);
  }
  CostMatrix cost(rows.size(), cols.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      cost(r, c) = valid(rows[r], cols[c]) ? 1.0 - similarity[rows[r] * np + cols[c]] : 2.0;
    }
  }
  for (const Assignment& a : assign_admissible(cost, 1.5)) {
    const std::size_t g = rows[a.row];
    const std::size_t p = cols[a.col];
    auto it = last_match_.find(gt_ids[g]);
    const bool sw = it != last_match_.end() && it->second != pred_ids[p];
    gt_done[g] = pred_done[p] = true;
    matched.emplace_back(g, p, sw);
  }

  std::sort(matched.begin(), matched.end());
  for (const auto& [g, p, sw] : matched) {
    ev.matches.push_back({gt_ids[g], pred_ids[p], similarity[g * np + p], sw});
    last_match_[gt_ids[g]] = pred_ids[p];
  }
  for (std::size_t g = 0; g < ng; ++g) {
    if (!gt_done[g]) ev.misses.push_back(gt_ids[g]);
  }
  for (std::size_t p = 0; p < np; ++p) {
    if (!pred_done[p]) ev.false_positives.push_back(pred_ids[p]);
  }
  frames_.push_back(std::move(ev));
}

void MotAccumulator::merge(const MotAccumulator& other) {
  for (FrameEvents ev : other.frames_) {
    ev.sequence += sequences_;
    frames_.push_back(std::move(ev));
  }
  sequences_ += other.sequences_;
  last_match_ = other.last_match_;
}

MotAccumulator MotAccumulator::subset(std::span<const std::size_t> frame_indices) const {
  MotAccumulator out(sim_thresh_);
  out.sequences_ = sequences_;
  for (std::size_t i : frame_indices) out.frames_.push_back(frames_.at(i));
  return out;
}

ClearMot clear_mot(const MotAccumulator& acc) {
  ClearMot r;
  std::map<ObjectKey, ObjectTrace> objects;
  double sim_sum = 0.0;
  for (const FrameEvents& ev : acc.frames()) {
    ++r.num_frames;
    r.num_gt += ev.num_gt;
    r.num_pred += ev.num_pred;
    r.matches += ev.matches.size();
    r.misses += ev.misses.size();
    r.false_positives += ev.false_positives.size();
    for (const MatchEvent& m : ev.matches) {
      sim_sum += m.similarity;
      if (m.is_switch) ++r.switches;
      ObjectTrace& t = objects[{ev.sequence, m.gt_id}];
      ++t.present;
      ++t.tracked;
      t.history.push_back(true);
    }
    for (std::int64_t g : ev.misses) {
      ObjectTrace& t = objects[{ev.sequence, g}];
      ++t.present;
      t.history.push_back(false);
    }
  }
  for (const auto& [key, t] : objects) {
    ++r.num_objects;
    const double ratio = static_cast<double>(t.tracked) / static_cast<double>(t.present);
    if (ratio >= 0.8) {
      ++r.mostly_tracked;
    } else if (ratio < 0.2) {
      ++r.mostly_lost;
    } else {
      ++r.partially_tracked;
    }
    const auto first = std::find(t.history.begin(), t.history.end(), true);
    if (first == t.history.end()) continue;
    const auto last = std::find(t.history.rbegin(), t.history.rend(), true).base();
    for (auto it = first; it + 1 < last; ++it) {
      if (*it && !*(it + 1)) ++r.fragmentations;
    }
  }
  r.mota_undefined = r.num_gt == 0;
  if (!r.mota_undefined) {
    r.mota = 1.0 - static_cast<double>(r.misses + r.false_positives + r.switches) /
                       static_cast<double>(r.num_gt);
  }
  r.mean_similarity_undefined = r.matches == 0;
  if (r.matches) r.mean_similarity = sim_sum / static_cast<double>(r.matches);
  return r;
}

IdMetrics id_metrics(const MotAccumulator& acc) {
  IdMetrics r;
  std::size_t gt_total = 0;
  std::size_t pred_total = 0;
  // Per sequence: (gt, pred) -> frames in which the pair is admissible.
  std::map<int, std::map<std::pair<std::int64_t, std::int64_t>, std::size_t>> shared;
  for (const FrameEvents& ev : acc.frames()) {
    gt_total += ev.num_gt;
    pred_total += ev.num_pred;
    auto& seq = shared[ev.sequence];
    for (const CandidatePair& c : ev.candidates) ++seq[{c.gt_id, c.pred_id}];
  }
  // Trajectories of different sequences never share frames, so the global
  // optimum is the sum of per-sequence optima.
  for (const auto& [seq, counts] : shared) {
    std::vector<std::int64_t> gts;
    std::vector<std::int64_t> preds;
    for (const auto& [pair, n] : counts) {
      gts.push_back(pair.first);
      preds.push_back(pair.second);
    }
    std::sort(gts.begin(), gts.end());
    gts.erase(std::unique(gts.begin(), gts.end()), gts.end());
    std::sort(preds.begin(), preds.end());
    preds.erase(std::unique(preds.begin(), preds.end()), preds.end());
    CostMatrix cost(gts.size(), preds.size());
    for (const auto& [pair, n] : counts) {
      const auto g = std::lower_bound(gts.begin(), gts.end(), pair.first) - gts.begin();
      const auto p = std::lower_bound(preds.begin(), preds.end(), pair.second) - preds.begin();
      cost(static_cast<std::size_t>(g), static_cast<std::size_t>(p)) = -static_cast<double>(n);
    }
    for (const Assignment& a : linear_sum_assignment(cost)) {
      r.idtp += static_cast<std::size_t>(-cost(a.row, a.col));
    }
  }
  r.idfn = gt_total - r.idtp;
  r.idfp = pred_total - r.idtp;
  r.idp_undefined = pred_total == 0;
  r.idr_undefined = gt_total == 0;
  r.idf1_undefined = gt_total + pred_total == 0;
  if (!r.idp_undefined) r.idp = static_cast<double>(r.idtp) / static_cast<double>(pred_total);
  if (!r.idr_undefined) r.idr = static_cast<double>(r.idtp) / static_cast<double>(gt_total);
  if (!r.idf1_undefined) {
    r.idf1 = 2.0 * static_cast<double>(r.idtp) /
             static_cast<double>(2 * r.idtp + r.idfp + r.idfn);
  }
  return r;
}

MotAccumulator accumulate_sequence(std::span<const GroundTruthFrame> gts,
                                   std::span<const TrackedFrame> preds, double sim_thresh,
                                   const EvalOptions& opts) {
  if (gts.size() != preds.size()) {
    throw Error(ErrorCode::kFrameMismatch,
                "ground truth has " + std::to_string(gts.size()) +
                    " frames, predictions have " + std::to_string(preds.size()));
  }
  for (std::size_t f = 0; f < gts.size(); ++f) {
    if (gts[f].frame_id != preds[f].frame_id) {
      throw Error(ErrorCode::kFrameMismatch,
                  "frame " + std::to_string(f) + ": ground truth id " +
                      std::to_string(gts[f].frame_id) + " vs prediction id " +
                      std::to_string(preds[f].frame_id));
    }
  }

  struct FrameSims {
    std::vector<std::int64_t> gt_ids;
    std::vector<std::int64_t> pred_ids;
    std::vector<double> sims;
  };
  std::vector<FrameSims> per_frame(gts.size());
  parallel_for(gts.size(), opts.threads, [&](std::size_t f) {
    const GroundTruthFrame& gt = gts[f];
    const TrackedFrame& pr = preds[f];
    const std::vector<GroundTruthInstance> trunks = trunk_instances(gt);
    std::vector<const GroundTruthInstance*> targets;
    for (const auto& inst : trunks) {
      if (inst.trunk_id > 0) targets.push_back(&inst);
    }
    std::vector<Point> extent;
    if (!gt.image_size) {
      for (const auto* inst : targets) append_points(*inst, extent);
      for (const auto& t : pr.tracks) append_points(t.trunk, extent);
    }
    const RasterGrid grid = make_grid(gt.image_size, extent, opts.raster_size);
    FrameSims& out = per_frame[f];
    std::vector<LabeledMasks> gm;
    for (const auto* inst : targets) {
      out.gt_ids.push_back(inst->trunk_id);
      gm.push_back(rasterize_instance(*inst, grid));
    }
    std::vector<LabeledMasks> pm;
    for (const auto& t : pr.tracks) {
      out.pred_ids.push_back(t.track_id);
      pm.push_back(rasterize_trunk(t.trunk, grid));
    }
    out.sims.resize(gm.size() * pm.size());
    for (std::size_t g = 0; g < gm.size(); ++g) {
      for (std::size_t p = 0; p < pm.size(); ++p) {
        out.sims[g * pm.size() + p] = iou_c(gm[g], pm[p]);
      }
    }
  });

  MotAccumulator acc(sim_thresh);
  acc.begin_sequence();
  for (std::size_t f = 0; f < gts.size(); ++f) {
    acc.update(gts[f].frame_id, per_frame[f].gt_ids, per_frame[f].pred_ids,
               per_frame[f].sims);
  }
  return acc;
}

ClearMot clear_mot(std::span<const GroundTruthFrame> gts, std::span<const TrackedFrame> preds,
                   double sim_thresh, const EvalOptions& opts) {
  return clear_mot(accumulate_sequence(gts, preds, sim_thresh, opts));
}

IdMetrics id_metrics(std::span<const GroundTruthFrame> gts,
                     std::span<const TrackedFrame> preds, double sim_thresh,
                     const EvalOptions& opts) {
  return id_metrics(accumulate_sequence(gts, preds, sim_thresh, opts));
}

}  // namespace trunkfuse
