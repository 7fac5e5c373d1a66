// Copyright 2026 The trunkfuse Authors
// SPDX-License-Identifier: Apache-2.0

#include "trunkfuse/metrics.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>
#include <unordered_map>

#include "trunkfuse/error.hpp"

namespace trunkfuse {

namespace {

std::vector<Point> box_polygon(const OrientedBox& b) {
  const auto c = b.corners();
  return {c.begin(), c.end()};
}

// Greedy matching of one image at one threshold; marks true positives in
// score order.
void match_image(const EvalImage& img, double thr, const std::vector<std::size_t>& order,
                 std::vector<std::uint8_t>& tp) {
  std::vector<bool> gt_used(img.num_gt, false);
  tp.assign(order.size(), 0);
  for (std::size_t k = 0; k < order.size(); ++k) {
    const std::size_t d = order[k];
    double best = thr;
    std::optional<std::size_t> hit;
    for (std::size_t g = 0; g < img.num_gt; ++g) {
      if (gt_used[g]) continue;
      const double v = img.overlaps[d * img.num_gt + g];
      if (v >= best && (!hit || v > best)) {
        best = v;
        hit = g;
      }
    }
    if (hit) {
      gt_used[*hit] = true;
      tp[k] = 1;
    }
  }
}

std::vector<std::size_t> score_order(const std::vector<double>& scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

template <typename Frame>
std::unordered_map<std::int64_t, std::size_t> index_by_id(std::span<const Frame> frames) {
  std::unordered_map<std::int64_t, std::size_t> out;
  for (std::size_t i = 0; i < frames.size(); ++i) out.emplace(frames[i].frame_id, i);
  return out;
}

RasterGrid frame_grid(const GroundTruthFrame& gt, std::vector<Point> extra, int raster_size) {
  if (!gt.image_size) {
    for (const auto& inst : gt.instances) append_points(inst, extra);
  }
  return make_grid(gt.image_size, extra, raster_size);
}

}  // namespace

std::vector<Point> component_polygon(const ComponentInstance& c) {
  if (c.contour) return c.contour->vertices();
  return box_polygon(c.obb);
}

LabeledMasks rasterize_instance(const GroundTruthInstance& gt, const RasterGrid& grid) {
  LabeledMasks out;
  for (const auto& [cls, contour] : gt.components) {
    out.emplace(cls, rasterize(contour.vertices(), grid));
  }
  return out;
}

LabeledMasks rasterize_trunk(const UnifiedTrunk& pred, const RasterGrid& grid) {
  LabeledMasks out;
  for (ComponentClass cls : kComponentClasses) {
    if (const auto& c = pred.component(cls)) {
      out.emplace(cls, rasterize(component_polygon(*c), grid));
    }
  }
  return out;
}

double iou_c(const LabeledMasks& gt, const LabeledMasks& pred) {
  if (gt.empty() && pred.empty()) {
    throw Error(ErrorCode::kEmptyInstances, "both instances have no components");
  }
  std::int64_t inter = 0;
  std::int64_t uni = 0;
  for (const auto& [cls, g] : gt) {
    auto it = pred.find(cls);
    if (it == pred.end()) {
      uni += g.area;
      continue;
    }
    const std::int64_t i = intersection_count(g, it->second);
    inter += i;
    uni += g.area + it->second.area - i;
  }
  for (const auto& [cls, p] : pred) {
    if (!gt.contains(cls)) uni += p.area;
  }
  return uni > 0 ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
}

double iou_c(const GroundTruthInstance& gt, const UnifiedTrunk& pred,
             const RasterGrid& grid) {
  return iou_c(rasterize_instance(gt, grid), rasterize_trunk(pred, grid));
}

void append_points(const GroundTruthInstance& gt, std::vector<Point>& out) {
  for (const auto& [cls, contour] : gt.components) {
    out.insert(out.end(), contour.vertices().begin(), contour.vertices().end());
  }
}

void append_points(const UnifiedTrunk& t, std::vector<Point>& out) {
  for (ComponentClass cls : kComponentClasses) {
    if (const auto& c = t.component(cls)) {
      const auto poly = component_polygon(*c);
      out.insert(out.end(), poly.begin(), poly.end());
    }
  }
}

double iou_threshold(std::size_t k) { return static_cast<double>(50 + 5 * k) / 100.0; }

double average_precision(std::span<const EvalImage> images, double threshold) {
  std::size_t num_gt = 0;
  std::vector<std::pair<double, std::uint8_t>> dets;
  std::vector<std::uint8_t> tp;
  for (const EvalImage& img : images) {
    num_gt += img.num_gt;
    const auto order = score_order(img.scores);
    match_image(img, threshold, order, tp);
    for (std::size_t k = 0; k < order.size(); ++k) {
      dets.emplace_back(img.scores[order[k]], tp[k]);
    }
  }
  if (num_gt == 0) {
    throw Error(ErrorCode::kEmptyInput, "average precision without ground truth");
  }
  std::stable_sort(dets.begin(), dets.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  std::vector<double> recall(dets.size());
  std::vector<double> precision(dets.size());
  double tps = 0.0;
  double fps = 0.0;
  for (std::size_t k = 0; k < dets.size(); ++k) {
    (dets[k].second ? tps : fps) += 1.0;
    recall[k] = tps / static_cast<double>(num_gt);
    precision[k] = tps / (tps + fps);
  }
  for (std::size_t k = dets.size(); k-- > 1;) {
    precision[k - 1] = std::max(precision[k - 1], precision[k]);
  }
  double sum = 0.0;
  for (int i = 0; i <= 100; ++i) {
    const double r = static_cast<double>(i) / 100.0;
    const auto it = std::lower_bound(recall.begin(), recall.end(), r);
    if (it != recall.end()) sum += precision[static_cast<std::size_t>(it - recall.begin())];
  }
  return sum / 101.0;
}

ApResult ap_50_95(std::span<const EvalImage> images) {
  ApResult r;
  for (const EvalImage& img : images) {
    r.num_gt += img.num_gt;
    r.num_det += img.scores.size();
  }
  if (r.num_gt == 0) {
    r.undefined = true;
    return r;
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < kIouThresholdCount; ++k) {
    r.per_threshold[k] = average_precision(images, iou_threshold(k));
    sum += r.per_threshold[k];
  }
  r.ap = sum / static_cast<double>(kIouThresholdCount);
  return r;
}

MapTable mean_over_classes(std::vector<std::pair<std::string, ApResult>> per_class) {
  MapTable t;
  t.per_class = std::move(per_class);
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& [name, ap] : t.per_class) {
    if (ap.undefined) {
      t.notes.push_back("class '" + name + "' has no ground truth; excluded from mAP");
      continue;
    }
    sum += ap.ap;
    ++n;
  }
  t.undefined = n == 0;
  t.mean = n ? sum / static_cast<double>(n) : 0.0;
  return t;
}

template <typename Frame>
std::vector<const Frame*> align_frames(std::span<const Frame> preds,
                                       std::span<const GroundTruthFrame> gts) {
  const auto gt_index = index_by_id(gts);
  std::vector<const Frame*> out(gts.size(), nullptr);
  for (const Frame& p : preds) {
    auto it = gt_index.find(p.frame_id);
    if (it == gt_index.end()) {
      throw Error(ErrorCode::kFrameMismatch,
                  "prediction frame " + std::to_string(p.frame_id) + " has no ground truth");
    }
    out[it->second] = &p;
  }
  return out;
}

template std::vector<const DetectionFrame*> align_frames(std::span<const DetectionFrame>,
                                                         std::span<const GroundTruthFrame>);
template std::vector<const FusedFrame*> align_frames(std::span<const FusedFrame>,
                                                     std::span<const GroundTruthFrame>);
template std::vector<const TrackedFrame*> align_frames(std::span<const TrackedFrame>,
                                                       std::span<const GroundTruthFrame>);

MapTable map_50_95(std::span<const DetectionFrame> preds,
                   std::span<const GroundTruthFrame> gts, TaskSource task,
                   OverlapKind overlap, const EvalOptions& opts) {
  const auto aligned = align_frames(preds, gts);
  constexpr std::size_t kClasses = kComponentClasses.size();
  std::vector<std::array<EvalImage, kClasses>> images(gts.size());

  parallel_for(gts.size(), opts.threads, [&](std::size_t f) {
    const GroundTruthFrame& gt = gts[f];
    std::vector<const Detection*> dets;
    if (aligned[f]) {
      for (const Detection& d : aligned[f]->detections) {
        if (d.source == task) dets.push_back(&d);
      }
    }
    std::optional<RasterGrid> grid;
    if (overlap == OverlapKind::kMaskIoU) {
      std::vector<Point> extent;
      if (!gt.image_size) {
        for (const Detection* d : dets) {
          const auto poly = d->contour ? d->contour->vertices() : box_polygon(*d->obb);
          extent.insert(extent.end(), poly.begin(), poly.end());
        }
      }
      grid = frame_grid(gt, std::move(extent), opts.raster_size);
    }
    for (std::size_t k = 0; k < kClasses; ++k) {
      const ComponentClass cls = kComponentClasses[k];
      std::vector<const Contour*> gt_contours;
      for (const auto& inst : gt.instances) {
        if (auto it = inst.components.find(cls); it != inst.components.end()) {
          gt_contours.push_back(&it->second);
        }
      }
      std::vector<const Detection*> cls_dets;
      for (const Detection* d : dets) {
        if (d->cls == cls) cls_dets.push_back(d);
      }
      EvalImage& img = images[f][k];
      img.num_gt = gt_contours.size();
      for (const Detection* d : cls_dets) img.scores.push_back(d->confidence);
      img.overlaps.assign(cls_dets.size() * gt_contours.size(), 0.0);
      if (overlap == OverlapKind::kMaskIoU) {
        std::vector<Mask> gm;
        for (const Contour* c : gt_contours) gm.push_back(rasterize(c->vertices(), *grid));
        for (std::size_t i = 0; i < cls_dets.size(); ++i) {
          const Detection& d = *cls_dets[i];
          const Mask dm = rasterize(d.contour ? d.contour->vertices() : box_polygon(*d.obb), *grid);
          for (std::size_t g = 0; g < gm.size(); ++g) {
            img.overlaps[i * gm.size() + g] = mask_iou(dm, gm[g]);
          }
        }
      } else {
        std::vector<OrientedBox> gb;
        for (const Contour* c : gt_contours) gb.push_back(min_area_obb(c->vertices()));
        for (std::size_t i = 0; i < cls_dets.size(); ++i) {
          const Detection& d = *cls_dets[i];
          const OrientedBox db = d.obb ? *d.obb : min_area_obb(d.contour->vertices());
          for (std::size_t g = 0; g < gb.size(); ++g) {
            img.overlaps[i * gb.size() + g] = obb_iou(db, gb[g]);
          }
        }
      }
    }
  });

  std::vector<std::pair<std::string, ApResult>> per_class;
  for (std::size_t k = 0; k < kClasses; ++k) {
    std::vector<EvalImage> cls_images;
    cls_images.reserve(images.size());
    for (auto& frame : images) cls_images.push_back(std::move(frame[k]));
    per_class.emplace_back(std::string(to_string(kComponentClasses[k])), ap_50_95(cls_images));
  }
  return mean_over_classes(std::move(per_class));
}

MapTable map_50_95_fused(std::span<const FusedFrame> preds,
                         std::span<const GroundTruthFrame> gts, const EvalOptions& opts) {
  const auto aligned = align_frames(preds, gts);
  std::vector<EvalImage> images(gts.size());
  parallel_for(gts.size(), opts.threads, [&](std::size_t f) {
    const GroundTruthFrame& gt = gts[f];
    static const std::vector<UnifiedTrunk> kNone;
    const auto& trunks = aligned[f] ? aligned[f]->trunks : kNone;
    std::vector<Point> extent;
    if (!gt.image_size) {
      for (const auto& t : trunks) append_points(t, extent);
    }
    const RasterGrid grid = frame_grid(gt, std::move(extent), opts.raster_size);
    std::vector<LabeledMasks> gm;
    for (const auto& inst : trunk_instances(gt)) gm.push_back(rasterize_instance(inst, grid));
    EvalImage& img = images[f];
    img.num_gt = gm.size();
    img.overlaps.assign(trunks.size() * gm.size(), 0.0);
    for (std::size_t i = 0; i < trunks.size(); ++i) {
      img.scores.push_back(trunks[i].confidence);
      const LabeledMasks pm = rasterize_trunk(trunks[i], grid);
      for (std::size_t g = 0; g < gm.size(); ++g) {
        img.overlaps[i * gm.size() + g] = iou_c(gm[g], pm);
      }
    }
  });
  return mean_over_classes({{"trunk", ap_50_95(images)}});
}

std::vector<GroundTruthInstance> trunk_instances(const GroundTruthFrame& frame) {
  std::vector<GroundTruthInstance> out;
  std::unordered_map<std::int64_t, std::size_t> slot;
  for (const auto& inst : frame.instances) {
    if (inst.trunk_id > 0) {
      auto [it, fresh] = slot.emplace(inst.trunk_id, out.size());
      if (!fresh) {
        for (const auto& [cls, c] : inst.components) out[it->second].components.emplace(cls, c);
        continue;
      }
    }
    out.push_back(inst);
  }
  return out;
}

OrientedBox gt_envelope(const GroundTruthInstance& gt) {
  std::vector<OrientedBox> boxes;
  for (const auto& [cls, c] : gt.components) boxes.push_back(min_area_obb(c.vertices()));
  return envelope_obb(boxes);
}

PrResult fused_pr(std::span<const FusedFrame> preds,
                  std::span<const GroundTruthFrame> gts, double iou_thresh) {
  const auto aligned = align_frames(preds, gts);
  PrResult r;
  for (std::size_t f = 0; f < gts.size(); ++f) {
    std::vector<OrientedBox> gt_boxes;
    for (const auto& inst : trunk_instances(gts[f])) gt_boxes.push_back(gt_envelope(inst));
    r.num_gt += gt_boxes.size();
    if (!aligned[f]) continue;
    const auto& trunks = aligned[f]->trunks;
    r.num_pred += trunks.size();
    std::vector<double> scores;
    for (const auto& t : trunks) scores.push_back(t.confidence);
    std::vector<bool> used(gt_boxes.size(), false);
    for (std::size_t i : score_order(scores)) {
      double best = iou_thresh;
      std::optional<std::size_t> hit;
      for (std::size_t g = 0; g < gt_boxes.size(); ++g) {
        if (used[g]) continue;
        const double v = obb_iou(trunks[i].envelope, gt_boxes[g]);
        if (v >= best && (!hit || v > best)) {
          best = v;
          hit = g;
        }
      }
      if (hit) {
        used[*hit] = true;
        ++r.true_positives;
      }
    }
  }
  r.precision_undefined = r.num_pred == 0;
  r.recall_undefined = r.num_gt == 0;
  if (!r.precision_undefined) {
    r.precision = static_cast<double>(r.true_positives) / static_cast<double>(r.num_pred);
  }
  if (!r.recall_undefined) {
    r.recall = static_cast<double>(r.true_positives) / static_cast<double>(r.num_gt);
  }
  return r;
}

std::vector<Stratum> stratify(std::span<const GroundTruthFrame> gts) {
  using Getter = Intensity (*)(const SceneParameters&);
  const std::array<std::pair<const char*, Getter>, 4> params = {{
      {"entropy", [](const SceneParameters& s) { return s.entropy; }},
      {"quantity", [](const SceneParameters& s) { return s.quantity; }},
      {"distance", [](const SceneParameters& s) { return s.distance; }},
      {"irregularity", [](const SceneParameters& s) { return s.irregularity; }},
  }};
  for (const auto& f : gts) {
    if (!f.scene) {
      throw Error(ErrorCode::kMissingSceneParameters,
                  "frame " + std::to_string(f.frame_id) + " has no scene parameters");
    }
  }
  std::vector<Stratum> out;
  for (const auto& [name, get] : params) {
    for (Intensity level : kIntensities) {
      Stratum s{name, std::string(to_string(level)), {}, 0};
      for (std::size_t i = 0; i < gts.size(); ++i) {
        if (get(*gts[i].scene) == level) {
          s.frames.push_back(i);
          s.instances += gts[i].instances.size();
        }
      }
      out.push_back(std::move(s));
    }
  }
  for (bool snow : {false, true}) {
    Stratum s{"snow", snow ? "true" : "false", {}, 0};
    for (std::size_t i = 0; i < gts.size(); ++i) {
      if (gts[i].scene->snow == snow) {
        s.frames.push_back(i);
        s.instances += gts[i].instances.size();
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers =
      std::min<std::size_t>(n, static_cast<std::size_t>(std::max(threads, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::size_t failed_index = n;
  std::mutex failure_mutex;
  // The lowest failing index wins so the reported error does not depend on
  // scheduling.
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (i < failed_index) {
          failed_index = i;
          failure = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace trunkfuse
