// Copyright 2026 The trunkfuse Authors
// SPDX-License-Identifier: Apache-2.0

#include "trunkfuse/fusion.hpp"

#include <algorithm>
#include <numeric>
#include <tuple>

#include "trunkfuse/assignment.hpp"
#include "trunkfuse/error.hpp"

namespace trunkfuse {

namespace {

auto box_key(const OrientedBox& b) {
  return std::make_tuple(b.cx, b.cy, b.width, b.height, b.angle);
}

bool contour_less(const std::optional<Contour>& a, const std::optional<Contour>& b) {
  if (a.has_value() != b.has_value()) return !a.has_value();
  if (!a) return false;
  return std::lexicographical_compare(
      a->vertices().begin(), a->vertices().end(), b->vertices().begin(),
      b->vertices().end(),
      [](Point p, Point q) { return std::tie(p.x, p.y) < std::tie(q.x, q.y); });
}

// Total order on detections used to make every later stage independent of
// the order detections arrive in.
bool detection_less(const Detection& a, const Detection& b) {
  if (a.confidence != b.confidence) return a.confidence > b.confidence;
  if (a.obb.has_value() != b.obb.has_value()) return !a.obb.has_value();
  if (a.obb && box_key(*a.obb) != box_key(*b.obb)) return box_key(*a.obb) < box_key(*b.obb);
  return contour_less(a.contour, b.contour);
}

bool component_less(const ComponentInstance& a, const ComponentInstance& b) {
  if (box_key(a.obb) != box_key(b.obb)) return box_key(a.obb) < box_key(b.obb);
  if (a.confidence != b.confidence) return a.confidence > b.confidence;
  return contour_less(a.contour, b.contour);
}

std::vector<std::size_t> filtered_order(std::span<const Detection> dets,
                                        double threshold) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < dets.size(); ++i) {
    if (dets[i].confidence >= threshold) idx.push_back(i);
  }
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return detection_less(dets[a], dets[b]);
  });
  return idx;
}

bool task_matched(const ComponentInstance& c) {
  return c.ood_index.has_value() && c.iseg_index.has_value();
}

// Pairs each row item with at most one column item, keeping pairs whose
// affinity reaches the threshold.
std::vector<Assignment> match_by_affinity(std::size_t rows, std::size_t cols,
                                          const auto& affinity, double min_affinity) {
  CostMatrix cost(rows, cols);
  std::vector<double> aff(rows * cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      aff[r * cols + c] = affinity(r, c);
      cost(r, c) = 1.0 - aff[r * cols + c];
    }
  }
  std::vector<Assignment> kept;
  for (const Assignment& a : linear_sum_assignment(cost)) {
    const double v = aff[a.row * cols + a.col];
    if (v > 0.0 && v >= min_affinity) kept.push_back(a);
  }
  return kept;
}

double max_edge_fraction(const OrientedBox& edges_of, const OrientedBox& region) {
  double best = 0.0;
  for (const Segment& e : obb_edges(edges_of)) {
    best = std::max(best, segment_inside_fraction(e, region));
  }
  return best;
}

Point nearer_replaced(std::array<Point, 2>& ends, Point p) {
  const std::size_t k = distance(ends[0], p) <= distance(ends[1], p) ? 0 : 1;
  ends[k] = p;
  return p;
}

}  // namespace

void FusionConfig::validate() const {
  auto check = [](double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw Error(ErrorCode::kInvalidConfig,
                  std::string(name) + " = " + std::to_string(v) + " outside [0, 1]");
    }
  };
  check(confidence_threshold, "confidence-thresh");
  check(task_match_min_iou, "task-match-min-iou");
  check(component_match_min_affinity, "component-match-min-affinity");
}

ComponentInstance component_from_ood(const Detection& det, std::size_t index) {
  ComponentInstance c;
  c.cls = det.cls;
  c.obb = det.obb ? *det.obb : min_area_obb(det.contour->vertices());
  c.confidence = det.confidence;
  c.ood_index = index;
  return c;
}

ComponentInstance component_from_iseg(const Detection& det, std::size_t index) {
  ComponentInstance c;
  c.cls = det.cls;
  c.obb = det.contour ? min_area_obb(det.contour->vertices()) : *det.obb;
  c.contour = det.contour;
  c.confidence = det.confidence;
  c.iseg_index = index;
  return c;
}

TaskMatchResult match_tasks(std::span<const Detection> ood,
                            std::span<const Detection> iseg, ComponentClass cls,
                            const FusionConfig& cfg) {
  std::vector<std::size_t> rows;
  std::vector<std::size_t> cols;
  for (std::size_t i = 0; i < ood.size(); ++i) {
    if (ood[i].cls == cls) rows.push_back(i);
  }
  for (std::size_t j = 0; j < iseg.size(); ++j) {
    if (iseg[j].cls == cls) cols.push_back(j);
  }
  std::vector<OrientedBox> iseg_boxes;
  iseg_boxes.reserve(cols.size());
  for (std::size_t j : cols) {
    const Detection& d = iseg[j];
    iseg_boxes.push_back(d.contour ? min_area_obb(d.contour->vertices()) : *d.obb);
  }

  CostMatrix cost(rows.size(), cols.size());
  std::vector<double> iou(rows.size() * cols.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const Detection& d = ood[rows[r]];
    const OrientedBox box = d.obb ? *d.obb : min_area_obb(d.contour->vertices());
    for (std::size_t c = 0; c < cols.size(); ++c) {
      iou[r * cols.size() + c] = obb_iou(box, iseg_boxes[c]);
      cost(r, c) = 1.0 - iou[r * cols.size() + c];
    }
  }

  TaskMatchResult result;
  std::vector<bool> row_used(rows.size(), false);
  std::vector<bool> col_used(cols.size(), false);
  for (const Assignment& a : linear_sum_assignment(cost)) {
    const double v = iou[a.row * cols.size() + a.col];
    if (v <= 0.0 || v < cfg.task_match_min_iou) continue;
    row_used[a.row] = col_used[a.col] = true;
    const Detection& o = ood[rows[a.row]];
    const Detection& s = iseg[cols[a.col]];
    ComponentInstance c = component_from_ood(o, rows[a.row]);
    c.contour = s.contour;
    c.iseg_index = cols[a.col];
    c.confidence = cfg.confidence_merge == ConfidenceMerge::kMax
                       ? std::max(o.confidence, s.confidence)
                       : 0.5 * (o.confidence + s.confidence);
    result.matched.push_back(std::move(c));
  }
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (!row_used[r]) result.unmatched_ood.push_back(rows[r]);
  }
  for (std::size_t c = 0; c < cols.size(); ++c) {
    if (!col_used[c]) result.unmatched_iseg.push_back(cols[c]);
  }
  return result;
}

double cut_side_affinity(const ComponentInstance& cut, const ComponentInstance& side) {
  return max_edge_fraction(side.obb, cut.obb);
}

double bound_side_affinity(const ComponentInstance& bound,
                           const ComponentInstance& side) {
  return max_edge_fraction(bound.obb, side.obb);
}

std::vector<ComponentGroup> match_components(std::span<const ComponentInstance> cuts,
                                             std::span<const ComponentInstance> sides,
                                             std::span<const ComponentInstance> bounds,
                                             const FusionConfig& cfg) {
  const double min_aff = cfg.component_match_min_affinity;
  const auto cut_pairs = match_by_affinity(
      cuts.size(), sides.size(),
      [&](std::size_t r, std::size_t c) { return cut_side_affinity(cuts[r], sides[c]); },
      min_aff);
  const auto bound_pairs = match_by_affinity(
      bounds.size(), sides.size(),
      [&](std::size_t r, std::size_t c) { return bound_side_affinity(bounds[r], sides[c]); },
      min_aff);

  std::vector<ComponentGroup> groups(sides.size());
  std::vector<bool> side_linked(sides.size(), false);
  for (std::size_t s = 0; s < sides.size(); ++s) groups[s].side = sides[s];
  std::vector<bool> cut_used(cuts.size(), false);
  std::vector<bool> bound_used(bounds.size(), false);
  for (const Assignment& a : cut_pairs) {
    groups[a.col].cut = cuts[a.row];
    cut_used[a.row] = side_linked[a.col] = true;
  }
  for (const Assignment& a : bound_pairs) {
    groups[a.col].bound = bounds[a.row];
    bound_used[a.row] = side_linked[a.col] = true;
  }

  const bool strict = cfg.unmatched_policy == UnmatchedPolicy::kRequireBoth;
  std::vector<ComponentGroup> out;
  for (std::size_t s = 0; s < sides.size(); ++s) {
    if (strict && !side_linked[s] && !task_matched(sides[s])) continue;
    out.push_back(std::move(groups[s]));
  }
  for (std::size_t i = 0; i < cuts.size(); ++i) {
    if (cut_used[i] || (strict && !task_matched(cuts[i]))) continue;
    out.push_back({std::nullopt, cuts[i], std::nullopt});
  }
  for (std::size_t i = 0; i < bounds.size(); ++i) {
    if (bound_used[i] || (strict && !task_matched(bounds[i]))) continue;
    out.push_back({std::nullopt, std::nullopt, bounds[i]});
  }
  return out;
}

Point cut_center(const ComponentInstance& cut) {
  if (cut.contour && cut.contour->size() >= 5) {
    try {
      const Ellipse e = fit_ellipse(cut.contour->vertices()).ellipse;
      const Point c{e.cx, e.cy};
      if (obb_contains(cut.obb, c, 1e-6)) return c;
    } catch (const Error&) {
    }
  }
  return cut.obb.center();
}

Axis derive_axis(const ComponentGroup& group) {
  Axis axis;
  if (group.side) {
    axis.endpoints = obb_short_edge_midpoints(group.side->obb);
    if (group.cut) {
      axis.cut_center = nearer_replaced(axis.endpoints, cut_center(*group.cut));
    } else if (group.bound) {
      nearer_replaced(axis.endpoints, group.bound->obb.center());
    }
  } else if (group.cut && group.bound) {
    axis.cut_center = cut_center(*group.cut);
    axis.endpoints = {group.bound->obb.center(), *axis.cut_center};
  } else if (group.cut) {
    axis.endpoints = obb_short_edge_midpoints(group.cut->obb);
    axis.cut_center = cut_center(*group.cut);
  } else if (group.bound) {
    axis.endpoints = obb_short_edge_midpoints(group.bound->obb);
  } else {
    throw Error(ErrorCode::kEmptyGroup, "component group has no components");
  }
  return axis;
}

UnifiedTrunk assemble_trunk(const ComponentGroup& group) {
  UnifiedTrunk t;
  t.side = group.side;
  t.cut = group.cut;
  t.bound = group.bound;
  const Axis axis = derive_axis(group);
  std::vector<OrientedBox> boxes;
  for (ComponentClass cls : kComponentClasses) {
    if (const auto& c = t.component(cls)) {
      boxes.push_back(c->obb);
      t.confidence = std::max(t.confidence, c->confidence);
    }
  }
  t.envelope = envelope_obb(boxes);
  t.endpoints = {clamp_to_obb(t.envelope, axis.endpoints[0]),
                 clamp_to_obb(t.envelope, axis.endpoints[1])};
  if (axis.cut_center) t.cut_center = clamp_to_obb(t.envelope, *axis.cut_center);
  return t;
}

std::vector<UnifiedTrunk> fuse_frame(std::span<const Detection> ood,
                                     std::span<const Detection> iseg,
                                     const FusionConfig& cfg) {
  const auto ood_idx = filtered_order(ood, cfg.confidence_threshold);
  const auto iseg_idx = filtered_order(iseg, cfg.confidence_threshold);
  std::vector<Detection> ood_sorted;
  std::vector<Detection> iseg_sorted;
  for (std::size_t i : ood_idx) ood_sorted.push_back(ood[i]);
  for (std::size_t i : iseg_idx) iseg_sorted.push_back(iseg[i]);

  std::array<std::vector<ComponentInstance>, 3> per_class;
  for (std::size_t k = 0; k < kComponentClasses.size(); ++k) {
    TaskMatchResult m = match_tasks(ood_sorted, iseg_sorted, kComponentClasses[k], cfg);
    auto& bucket = per_class[k];
    bucket = std::move(m.matched);
    for (std::size_t i : m.unmatched_ood) {
      bucket.push_back(component_from_ood(ood_sorted[i], i));
    }
    for (std::size_t i : m.unmatched_iseg) {
      bucket.push_back(component_from_iseg(iseg_sorted[i], i));
    }
    std::stable_sort(bucket.begin(), bucket.end(), component_less);
    // Report indices relative to the caller's lists.
    for (auto& c : bucket) {
      if (c.ood_index) c.ood_index = ood_idx[*c.ood_index];
      if (c.iseg_index) c.iseg_index = iseg_idx[*c.iseg_index];
    }
  }

  std::vector<UnifiedTrunk> trunks;
  for (const ComponentGroup& g : match_components(per_class[1], per_class[0], per_class[2], cfg)) {
    trunks.push_back(assemble_trunk(g));
  }
  std::stable_sort(trunks.begin(), trunks.end(), [](const UnifiedTrunk& a, const UnifiedTrunk& b) {
    if (box_key(a.envelope) != box_key(b.envelope)) {
      return box_key(a.envelope) < box_key(b.envelope);
    }
    return a.confidence > b.confidence;
  });
  return trunks;
}

FusedFrame fuse_frame(const DetectionFrame& frame, const FusionConfig& cfg) {
  std::vector<Detection> ood;
  std::vector<Detection> iseg;
  for (const Detection& d : frame.detections) {
    (d.source == TaskSource::kOod ? ood : iseg).push_back(d);
  }
  return {frame.frame_id, frame.timestamp_s, fuse_frame(ood, iseg, cfg)};
}

}  // namespace trunkfuse
