// Copyright 2026 The trunkfuse Authors
// SPDX-License-Identifier: Apache-2.0

#include "trunkfuse/pipeline.hpp"

#include <algorithm>
#include <map>

#include "trunkfuse/error.hpp"
#include "trunkfuse/fusion.hpp"
#include "trunkfuse/metrics.hpp"
#include "trunkfuse/model_io.hpp"
#include "trunkfuse/mot_metrics.hpp"
#include "trunkfuse/overlay.hpp"
#include "trunkfuse/tracking.hpp"

namespace trunkfuse {

namespace {

InputDigest digest(const fs::path& p) { return {p.filename().string(), file_sha256(p)}; }

Report new_report(const std::string& kind, const Config& cfg,
                  std::initializer_list<fs::path> inputs) {
  Report r;
  r.kind = kind;
  r.config = cfg.entries();
  for (const fs::path& p : inputs) r.inputs.push_back(digest(p));
  return r;
}

void add_ap_table(Report& r, const std::string& name, const MapTable& t) {
  ReportTable table{name, {"class", "ap50_95", "ap50", "ap75", "num_gt", "num_det", "undefined"}, {}};
  for (const auto& [cls, ap] : t.per_class) {
    table.rows.push_back({cls, ap.ap, ap.per_threshold[0], ap.per_threshold[5],
                          static_cast<std::int64_t>(ap.num_gt),
                          static_cast<std::int64_t>(ap.num_det),
                          static_cast<std::int64_t>(ap.undefined)});
  }
  r.tables.push_back(std::move(table));
  for (const std::string& n : t.notes) r.notes.push_back(name + ": " + n);
}

template <typename Frame>
std::vector<Frame> frames_of(std::span<const Frame> preds, std::span<const GroundTruthFrame> gts,
                             std::span<const std::size_t> indices,
                             std::vector<GroundTruthFrame>& gt_out) {
  std::map<std::int64_t, const Frame*> by_id;
  for (const Frame& f : preds) by_id.emplace(f.frame_id, &f);
  std::vector<Frame> out;
  for (std::size_t i : indices) {
    gt_out.push_back(gts[i]);
    if (auto it = by_id.find(gts[i].frame_id); it != by_id.end()) out.push_back(*it->second);
  }
  return out;
}

bool all_have_scene(std::span<const GroundTruthFrame> gts, Report& r) {
  for (const GroundTruthFrame& f : gts) {
    if (!f.scene) {
      r.notes.push_back("strata skipped: frame " + std::to_string(f.frame_id) +
                        " has no scene parameters");
      return false;
    }
  }
  return true;
}

std::vector<std::string> stratum_columns(std::initializer_list<const char*> metrics) {
  std::vector<std::string> cols{"parameter", "level", "frames", "instances"};
  for (const char* m : metrics) cols.emplace_back(m);
  return cols;
}

std::vector<Cell> stratum_row(const Stratum& s) {
  return {s.parameter, s.level, static_cast<std::int64_t>(s.frames.size()),
          static_cast<std::int64_t>(s.instances)};
}

double defined_or_zero(double v, bool undefined) { return undefined ? 0.0 : v; }

void eval_detections(const Config& cfg, Report& r, std::span<const DetectionFrame> preds,
                     std::span<const GroundTruthFrame> gts) {
  const MapTable ood = map_50_95(preds, gts, TaskSource::kOod, OverlapKind::kObbIoU, cfg.eval);
  const MapTable iseg =
      map_50_95(preds, gts, TaskSource::kIseg, OverlapKind::kMaskIoU, cfg.eval);
  r.add_metric("ood.map50_95", ood.mean, ood.undefined);
  r.add_metric("iseg.map50_95", iseg.mean, iseg.undefined);
  add_ap_table(r, "ood", ood);
  add_ap_table(r, "iseg", iseg);
  if (!all_have_scene(gts, r)) return;
  ReportTable t{"strata", stratum_columns({"ood.map50_95", "iseg.map50_95"}), {}};
  for (const Stratum& s : stratify(gts)) {
    std::vector<Cell> row = stratum_row(s);
    std::vector<GroundTruthFrame> sub_gt;
    const auto sub = frames_of(preds, gts, s.frames, sub_gt);
    if (s.frames.empty()) {
      row.insert(row.end(), {0.0, 0.0});
    } else {
      const MapTable o = map_50_95(std::span<const DetectionFrame>(sub), sub_gt,
                                   TaskSource::kOod, OverlapKind::kObbIoU, cfg.eval);
      const MapTable i = map_50_95(std::span<const DetectionFrame>(sub), sub_gt,
                                   TaskSource::kIseg, OverlapKind::kMaskIoU, cfg.eval);
      row.insert(row.end(), {defined_or_zero(o.mean, o.undefined),
                             defined_or_zero(i.mean, i.undefined)});
    }
    t.rows.push_back(std::move(row));
  }
  r.tables.push_back(std::move(t));
}

void eval_fused(const Config& cfg, Report& r, std::span<const FusedFrame> preds,
                std::span<const GroundTruthFrame> gts) {
  const MapTable m = map_50_95_fused(preds, gts, cfg.eval);
  const PrResult pr = fused_pr(preds, gts, cfg.iou_thresh);
  r.add_metric("fused.map50_95", m.mean, m.undefined);
  r.add_metric("fused.precision", pr.precision, pr.precision_undefined);
  r.add_metric("fused.recall", pr.recall, pr.recall_undefined);
  r.add_metric("fused.true_positives", static_cast<double>(pr.true_positives));
  r.add_metric("fused.num_pred", static_cast<double>(pr.num_pred));
  r.add_metric("fused.num_gt", static_cast<double>(pr.num_gt));
  add_ap_table(r, "fused", m);
  if (!all_have_scene(gts, r)) return;
  ReportTable t{"strata", stratum_columns({"fused.map50_95", "fused.precision", "fused.recall"}),
                {}};
  for (const Stratum& s : stratify(gts)) {
    std::vector<Cell> row = stratum_row(s);
    std::vector<GroundTruthFrame> sub_gt;
    const auto sub = frames_of(preds, gts, s.frames, sub_gt);
    if (s.frames.empty()) {
      row.insert(row.end(), {0.0, 0.0, 0.0});
    } else {
      const MapTable sm = map_50_95_fused(std::span<const FusedFrame>(sub), sub_gt, cfg.eval);
      const PrResult sp = fused_pr(std::span<const FusedFrame>(sub), sub_gt, cfg.iou_thresh);
      row.insert(row.end(), {defined_or_zero(sm.mean, sm.undefined),
                             defined_or_zero(sp.precision, sp.precision_undefined),
                             defined_or_zero(sp.recall, sp.recall_undefined)});
    }
    t.rows.push_back(std::move(row));
  }
  r.tables.push_back(std::move(t));
}

void add_mot_metrics(Report& r, const ClearMot& m, const IdMetrics& id) {
  r.add_metric("mota", m.mota, m.mota_undefined);
  r.add_metric("idf1", id.idf1, id.idf1_undefined);
  r.add_metric("idp", id.idp, id.idp_undefined);
  r.add_metric("idr", id.idr, id.idr_undefined);
  r.add_metric("miou_c", m.mean_similarity, m.mean_similarity_undefined);
  r.add_metric("num_frames", static_cast<double>(m.num_frames));
  r.add_metric("num_gt", static_cast<double>(m.num_gt));
  r.add_metric("num_pred", static_cast<double>(m.num_pred));
  r.add_metric("matches", static_cast<double>(m.matches));
  r.add_metric("misses", static_cast<double>(m.misses));
  r.add_metric("false_positives", static_cast<double>(m.false_positives));
  r.add_metric("switches", static_cast<double>(m.switches));
  r.add_metric("fragmentations", static_cast<double>(m.fragmentations));
  r.add_metric("num_objects", static_cast<double>(m.num_objects));
  r.add_metric("mostly_tracked", static_cast<double>(m.mostly_tracked));
  r.add_metric("partially_tracked", static_cast<double>(m.partially_tracked));
  r.add_metric("mostly_lost", static_cast<double>(m.mostly_lost));
  r.add_metric("idtp", static_cast<double>(id.idtp));
  r.add_metric("idfp", static_cast<double>(id.idfp));
  r.add_metric("idfn", static_cast<double>(id.idfn));
}

std::vector<std::int64_t> ids_of(const TrackedFrame& f) {
  std::vector<std::int64_t> ids;
  for (const auto& t : f.tracks) ids.push_back(t.track_id);
  return ids;
}

std::vector<UnifiedTrunk> trunks_of(const TrackedFrame& f) {
  std::vector<UnifiedTrunk> out;
  for (const auto& t : f.tracks) out.push_back(t.trunk);
  return out;
}

// Ground truth read as perfect tracking output: trunk ids become track ids.
// Merged single-trunk instances have no component slot and are skipped.
TrackedFrame tracks_from_ground_truth(const GroundTruthFrame& gt) {
  TrackedFrame out{gt.frame_id, gt.timestamp_s, {}};
  for (const GroundTruthInstance& inst : trunk_instances(gt)) {
    if (inst.trunk_id <= 0 || inst.components.count(ComponentClass::kTrunk)) continue;
    ComponentGroup g;
    for (const auto& [cls, c] : inst.components) {
      ComponentInstance ci{cls, min_area_obb(c.vertices()), c, 1.0, std::nullopt, std::nullopt};
      if (cls == ComponentClass::kSide) g.side = ci;
      if (cls == ComponentClass::kCut) g.cut = ci;
      if (cls == ComponentClass::kBound) g.bound = ci;
    }
    out.tracks.push_back({inst.trunk_id, assemble_trunk(g), 0});
  }
  return out;
}

void write_targets(JsonlWriter& w, const GroundTruthFrame& frame,
                   const std::vector<ObbTarget>& targets) {
  Json j;
  j["format_version"] = kFormatVersion;
  j["frame_id"] = frame.frame_id;
  j["timestamp_s"] = frame.timestamp_s;
  Json arr = Json::array();
  for (const ObbTarget& t : targets) {
    arr.push_back({{"trunk_id", t.trunk_id},
                   {"class", std::string(to_string(t.cls))},
                   {"obb", to_json(t.obb)}});
  }
  j["targets"] = std::move(arr);
  w.write(j);
}

}  // namespace

RecordKind detect_record_kind(const fs::path& path) {
  JsonlReader reader(path);
  Json j;
  if (!reader.next(j)) throw Error(ErrorCode::kEmptyInput, path.string() + ": no records");
  if (!j.is_object()) {
    throw Error(ErrorCode::kSchemaError, path.string() + " line " +
                                             std::to_string(reader.line()) +
                                             ": record is not an object");
  }
  if (j.contains("detections")) return RecordKind::kDetections;
  if (j.contains("trunks")) return RecordKind::kFused;
  if (j.contains("tracks")) return RecordKind::kTracks;
  if (j.contains("instances")) return RecordKind::kGroundTruth;
  if (j.contains("primitives")) return RecordKind::kAnnotations;
  throw Error(ErrorCode::kSchemaError,
              path.string() + " line " + std::to_string(reader.line()) +
                  ": expected one of detections, trunks, tracks, instances, primitives");
}

RunSummary run_fuse(const Config& cfg, const fs::path& detections, const fs::path& out) {
  cfg.validate();
  const std::vector<DetectionFrame> frames = load_detections(detections);
  JsonlWriter writer(out);
  RunSummary s;
  for (const DetectionFrame& f : frames) {
    const FusedFrame fused = fuse_frame(f, cfg.fusion);
    writer.write(to_json(fused));
    if (!cfg.overlay_dir.empty()) {
      write_overlay(cfg.overlay_dir, fused.frame_id, fused.trunks, {}, std::nullopt,
                    cfg.eval.raster_size);
    }
    ++s.frames;
    s.objects += fused.trunks.size();
  }
  writer.close();
  return s;
}

RunSummary run_track(const Config& cfg, const fs::path& input, const fs::path& out) {
  cfg.validate();
  const RecordKind kind = detect_record_kind(input);
  if (kind != RecordKind::kDetections && kind != RecordKind::kFused) {
    throw Error(ErrorCode::kSchemaError,
                input.string() + ": expected detections or fused trunks");
  }
  JsonlReader reader(input);
  JsonlWriter writer(out);
  Tracker tracker(cfg.tracker);
  RunSummary s;
  Json j;
  while (reader.next(j)) {
    const std::string where = input.string() + " line " + std::to_string(reader.line());
    FusedFrame fused = kind == RecordKind::kDetections
                           ? fuse_frame(parse_detection_frame(j, where), cfg.fusion)
                           : parse_fused_frame(j, where);
    TrackedFrame tracked;
    tracked.frame_id = fused.frame_id;
    tracked.timestamp_s = fused.timestamp_s;
    try {
      tracked.tracks = tracker.step(fused.trunks, fused.timestamp_s);
    } catch (const Error& e) {
      throw with_context(e, where);
    }
    writer.write(to_json(tracked));
    if (!cfg.overlay_dir.empty()) {
      write_overlay(cfg.overlay_dir, tracked.frame_id, trunks_of(tracked), ids_of(tracked),
                    std::nullopt, cfg.eval.raster_size);
    }
    ++s.frames;
    s.objects += tracked.tracks.size();
  }
  writer.close();
  return s;
}

Report eval_det(const Config& cfg, const fs::path& predictions, const fs::path& ground_truth) {
  cfg.validate();
  const std::vector<GroundTruthFrame> gts = load_ground_truth(ground_truth);
  Report r = new_report("eval-det", cfg, {predictions, ground_truth});
  switch (detect_record_kind(predictions)) {
    case RecordKind::kDetections:
      eval_detections(cfg, r, load_detections(predictions), gts);
      break;
    case RecordKind::kFused:
      eval_fused(cfg, r, load_fused(predictions), gts);
      break;
    case RecordKind::kTracks: {
      std::vector<FusedFrame> fused;
      for (const TrackedFrame& t : load_tracks(predictions)) {
        fused.push_back({t.frame_id, t.timestamp_s, trunks_of(t)});
      }
      eval_fused(cfg, r, fused, gts);
      break;
    }
    default:
      throw Error(ErrorCode::kSchemaError,
                  predictions.string() + ": expected detections, fused trunks or tracks");
  }
  return r;
}

Report eval_mot(const Config& cfg, const fs::path& tracks, const fs::path& ground_truth) {
  cfg.validate();
  const std::vector<GroundTruthFrame> gts = load_ground_truth(ground_truth);
  std::vector<TrackedFrame> preds;
  if (detect_record_kind(tracks) == RecordKind::kGroundTruth) {
    for (const GroundTruthFrame& f : load_ground_truth(tracks)) {
      preds.push_back(tracks_from_ground_truth(f));
    }
  } else {
    preds = load_tracks(tracks);
  }
  Report r = new_report("eval-mot", cfg, {tracks, ground_truth});
  const MotAccumulator acc = accumulate_sequence(gts, preds, cfg.sim_thresh, cfg.eval);
  add_mot_metrics(r, clear_mot(acc), id_metrics(acc));
  if (!all_have_scene(gts, r)) return r;
  ReportTable t{"strata", stratum_columns({"mota", "idf1", "miou_c", "switches"}), {}};
  for (const Stratum& s : stratify(gts)) {
    std::vector<Cell> row = stratum_row(s);
    const MotAccumulator sub = acc.subset(s.frames);
    const ClearMot m = clear_mot(sub);
    const IdMetrics id = id_metrics(sub);
    row.insert(row.end(), {defined_or_zero(m.mota, m.mota_undefined),
                           defined_or_zero(id.idf1, id.idf1_undefined),
                           defined_or_zero(m.mean_similarity, m.mean_similarity_undefined),
                           static_cast<std::int64_t>(m.switches)});
    t.rows.push_back(std::move(row));
  }
  r.tables.push_back(std::move(t));
  return r;
}

RunSummary run_annotate(const Config& cfg, const fs::path& annotations,
                        const fs::path& ground_truth_out,
                        const std::optional<fs::path>& targets_out) {
  cfg.validate();
  const std::vector<AnnotationFrame> frames = load_annotations(annotations);
  std::vector<GroundTruthFrame> gts;
  std::optional<JsonlWriter> targets;
  if (targets_out) targets.emplace(*targets_out);
  RunSummary s;
  for (const AnnotationFrame& f : frames) {
    const std::string where = "frame " + std::to_string(f.frame_id);
    DerivedComponents derived;
    try {
      derived = derive_components(f.primitives, cfg.annotation);
    } catch (const Error& e) {
      throw with_context(e, annotations.string() + " " + where);
    }
    GroundTruthFrame header;
    header.frame_id = f.frame_id;
    header.timestamp_s = f.timestamp_s;
    header.scene = f.scene;
    header.image_size = f.image_size;
    ExportResult ex = export_ground_truth(derived, cfg.export_variant, header);
    for (const std::string& w : derived.warnings) s.warnings.push_back(where + ": " + w);
    for (const std::string& w : ex.warnings) s.warnings.push_back(where + ": " + w);
    if (targets) write_targets(*targets, ex.frame, ex.targets);
    s.objects += ex.frame.instances.size();
    gts.push_back(std::move(ex.frame));
    ++s.frames;
  }
  save_ground_truth(ground_truth_out, gts);
  if (targets) targets->close();
  return s;
}

RunSummary run_simulate(const Config& cfg, const SimulateOutputs& out) {
  cfg.validate();
  const SceneSpec base = scene_spec(cfg);
  std::vector<GroundTruthFrame> gts;
  std::vector<AnnotationFrame> annotations;
  if (cfg.simulation.frames > 1) {
    if (out.annotations) {
      throw Error(ErrorCode::kInvalidConfig,
                  "annotations: only available for single scenes, not sequences");
    }
    MotionSpec motion = cfg.simulation.motion;
    motion.frame_rate = cfg.tracker.frame_rate;
    gts = gen_sequence(base, cfg.simulation.frames, motion);
  } else {
    for (std::size_t i = 0; i < cfg.simulation.scenes; ++i) {
      SceneSpec spec = base;
      spec.seed = base.seed + i;
      SimScene scene = gen_scene_model(spec);
      scene.frame.frame_id = static_cast<std::int64_t>(i);
      scene.frame.timestamp_s = static_cast<double>(i) / cfg.tracker.frame_rate;
      if (out.annotations) {
        AnnotationFrame a = gen_annotations(scene);
        a.frame_id = scene.frame.frame_id;
        a.timestamp_s = scene.frame.timestamp_s;
        annotations.push_back(std::move(a));
      }
      gts.push_back(std::move(scene.frame));
    }
  }
  RunSummary s;
  s.frames = gts.size();
  for (const GroundTruthFrame& f : gts) s.objects += f.instances.size();
  save_ground_truth(out.ground_truth, gts);
  if (out.detections) {
    std::vector<DetectionFrame> dets;
    for (const GroundTruthFrame& f : gts) {
      dets.push_back(perturb_detections(f, cfg.noise, cfg.seed).to_frame(f.frame_id, f.timestamp_s));
    }
    save_detections(*out.detections, dets);
  }
  if (out.annotations) save_annotations(*out.annotations, annotations);
  return s;
}

}  // namespace trunkfuse
