// Copyright 2026 The trunkfuse Authors
// SPDX-License-Identifier: Apache-2.0

#include "trunkfuse/trunkfuse.h"

#include <cstring>
#include <new>
#include <string>

#include "trunkfuse/assignment.hpp"
#include "trunkfuse/config.hpp"
#include "trunkfuse/error.hpp"
#include "trunkfuse/pipeline.hpp"
#include "trunkfuse/tracking.hpp"

struct tf_config {
  trunkfuse::Config cfg;
  tf_message_fn on_message = nullptr;
  void* user = nullptr;
};

struct tf_tracker {
  explicit tf_tracker(const trunkfuse::TrackerConfig& c) : tracker(c) {}
  trunkfuse::Tracker tracker;
};

namespace {

thread_local std::string g_last_error;

tf_status fail(tf_status s, std::string msg) {
  g_last_error = std::move(msg);
  return s;
}

tf_status status_of(trunkfuse::ErrorCode code) {
  return static_cast<tf_status>(static_cast<int>(code) + 1);
}

template <typename Fn>
tf_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return TF_OK;
  } catch (const trunkfuse::Error& e) {
    return fail(status_of(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(TF_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(TF_ERR_INTERNAL, e.what());
  }
}

tf_status null_arg(const char* name) {
  return fail(TF_ERR_INVALID_ARGUMENT, std::string(name) + " is NULL");
}

void fill(tf_run_summary* out, const trunkfuse::RunSummary& s, const tf_config* cfg) {
  if (cfg->on_message) {
    for (const std::string& w : s.warnings) cfg->on_message(w.c_str(), cfg->user);
  }
  if (!out) return;
  out->frames = s.frames;
  out->objects = s.objects;
  out->warnings = s.warnings.size();
}

trunkfuse::OrientedBox to_box(const tf_obb& b) {
  return {b.cx, b.cy, b.width, b.height, b.angle};
}

tf_obb from_box(const trunkfuse::OrientedBox& b) {
  return {b.cx, b.cy, b.width, b.height, b.angle};
}

}  // namespace

extern "C" {

const char* tf_status_name(tf_status status) {
  switch (status) {
    case TF_OK: return "Ok";
    case TF_ERR_INVALID_ARGUMENT: return "InvalidArgument";
    case TF_ERR_BUFFER_TOO_SMALL: return "BufferTooSmall";
    case TF_ERR_INTERNAL: return "Internal";
    default: break;
  }
  const int code = static_cast<int>(status) - 1;
  if (code >= 0 && code <= static_cast<int>(trunkfuse::ErrorCode::kInvalidConfig)) {
    return trunkfuse::error_code_name(static_cast<trunkfuse::ErrorCode>(code)).data();
  }
  return "Unknown";
}

const char* tf_last_error(void) { return g_last_error.c_str(); }

const char* tf_version(void) { return "0.1.0"; }

tf_status tf_config_create(tf_config** out) {
  if (!out) return null_arg("out");
  return guarded([&] { *out = new tf_config(); });
}

void tf_config_destroy(tf_config* config) { delete config; }

tf_status tf_config_set(tf_config* config, const char* key, const char* value) {
  if (!config) return null_arg("config");
  if (!key) return null_arg("key");
  if (!value) return null_arg("value");
  return guarded([&] { config->cfg.set(key, value); });
}

tf_status tf_config_load(tf_config* config, const char* path) {
  if (!config) return null_arg("config");
  if (!path) return null_arg("path");
  return guarded([&] { config->cfg.load_file(path); });
}

tf_status tf_config_get(const tf_config* config, const char* key, char* buffer,
                        size_t buffer_size, size_t* needed) {
  if (!config) return null_arg("config");
  if (!key) return null_arg("key");
  std::string value;
  const tf_status s = guarded([&] { value = config->cfg.get(key); });
  if (s != TF_OK) return s;
  if (needed) *needed = value.size() + 1;
  if (!buffer || buffer_size < value.size() + 1) {
    return fail(TF_ERR_BUFFER_TOO_SMALL, std::string(key) + ": value needs " +
                                             std::to_string(value.size() + 1) + " bytes");
  }
  std::memcpy(buffer, value.c_str(), value.size() + 1);
  return TF_OK;
}

tf_status tf_config_validate(const tf_config* config) {
  if (!config) return null_arg("config");
  return guarded([&] { config->cfg.validate(); });
}

void tf_config_set_message_handler(tf_config* config, tf_message_fn fn, void* user) {
  if (!config) return;
  config->on_message = fn;
  config->user = user;
}

size_t tf_config_key_count(void) { return trunkfuse::Config::keys().size(); }

const char* tf_config_key_name(size_t index) {
  const auto& keys = trunkfuse::Config::keys();
  return index < keys.size() ? keys[index].c_str() : nullptr;
}

tf_status tf_run_fuse(const tf_config* config, const char* detections_path,
                      const char* fused_path, tf_run_summary* summary) {
  if (!config) return null_arg("config");
  if (!detections_path) return null_arg("detections_path");
  if (!fused_path) return null_arg("fused_path");
  return guarded([&] {
    fill(summary, trunkfuse::run_fuse(config->cfg, detections_path, fused_path), config);
  });
}

tf_status tf_run_track(const tf_config* config, const char* input_path, const char* tracks_path,
                       tf_run_summary* summary) {
  if (!config) return null_arg("config");
  if (!input_path) return null_arg("input_path");
  if (!tracks_path) return null_arg("tracks_path");
  return guarded([&] {
    fill(summary, trunkfuse::run_track(config->cfg, input_path, tracks_path), config);
  });
}

tf_status tf_run_eval_det(const tf_config* config, const char* predictions_path,
                          const char* ground_truth_path, const char* report_path) {
  if (!config) return null_arg("config");
  if (!predictions_path) return null_arg("predictions_path");
  if (!ground_truth_path) return null_arg("ground_truth_path");
  if (!report_path) return null_arg("report_path");
  return guarded([&] {
    trunkfuse::write_report(
        trunkfuse::eval_det(config->cfg, predictions_path, ground_truth_path), report_path);
  });
}

tf_status tf_run_eval_mot(const tf_config* config, const char* tracks_path,
                          const char* ground_truth_path, const char* report_path) {
  if (!config) return null_arg("config");
  if (!tracks_path) return null_arg("tracks_path");
  if (!ground_truth_path) return null_arg("ground_truth_path");
  if (!report_path) return null_arg("report_path");
  return guarded([&] {
    trunkfuse::write_report(trunkfuse::eval_mot(config->cfg, tracks_path, ground_truth_path),
                            report_path);
  });
}

tf_status tf_run_annotate(const tf_config* config, const char* annotations_path,
                          const char* ground_truth_path, const char* targets_path,
                          tf_run_summary* summary) {
  if (!config) return null_arg("config");
  if (!annotations_path) return null_arg("annotations_path");
  if (!ground_truth_path) return null_arg("ground_truth_path");
  return guarded([&] {
    std::optional<std::filesystem::path> targets;
    if (targets_path) targets = targets_path;
    fill(summary,
         trunkfuse::run_annotate(config->cfg, annotations_path, ground_truth_path, targets),
         config);
  });
}

tf_status tf_run_simulate(const tf_config* config, const char* ground_truth_path,
                          const char* detections_path, const char* annotations_path,
                          tf_run_summary* summary) {
  if (!config) return null_arg("config");
  if (!ground_truth_path) return null_arg("ground_truth_path");
  return guarded([&] {
    trunkfuse::SimulateOutputs out;
    out.ground_truth = ground_truth_path;
    if (detections_path) out.detections = detections_path;
    if (annotations_path) out.annotations = annotations_path;
    fill(summary, trunkfuse::run_simulate(config->cfg, out), config);
  });
}

tf_status tf_obb_canonicalize(const tf_obb* box, tf_obb* out) {
  if (!box) return null_arg("box");
  if (!out) return null_arg("out");
  return guarded([&] { *out = from_box(trunkfuse::canonicalize_obb(to_box(*box))); });
}

tf_status tf_obb_iou(const tf_obb* a, const tf_obb* b, double* out) {
  if (!a) return null_arg("a");
  if (!b) return null_arg("b");
  if (!out) return null_arg("out");
  return guarded([&] {
    *out = trunkfuse::obb_iou(trunkfuse::canonicalize_obb(to_box(*a)),
                              trunkfuse::canonicalize_obb(to_box(*b)));
  });
}

tf_status tf_linear_sum_assignment(const double* cost, size_t rows, size_t cols,
                                   size_t* row_ind, size_t* col_ind, size_t* count) {
  if (!cost && rows * cols > 0) return null_arg("cost");
  if (!count) return null_arg("count");
  if ((!row_ind || !col_ind) && rows > 0 && cols > 0) return null_arg("row_ind/col_ind");
  return guarded([&] {
    trunkfuse::CostMatrix m(rows, cols);
    for (size_t r = 0; r < rows; ++r) {
      for (size_t c = 0; c < cols; ++c) m(r, c) = cost[r * cols + c];
    }
    const auto pairs = trunkfuse::linear_sum_assignment(m);
    for (size_t i = 0; i < pairs.size(); ++i) {
      row_ind[i] = pairs[i].row;
      col_ind[i] = pairs[i].col;
    }
    *count = pairs.size();
  });
}

tf_status tf_tracker_create(const tf_config* config, tf_tracker** out) {
  if (!out) return null_arg("out");
  return guarded([&] {
    trunkfuse::TrackerConfig tc;
    if (config) {
      config->cfg.validate();
      tc = config->cfg.tracker;
    }
    tc.validate();
    *out = new tf_tracker(tc);
  });
}

void tf_tracker_destroy(tf_tracker* tracker) { delete tracker; }

tf_status tf_tracker_step(tf_tracker* tracker, const tf_obb* envelopes, const double* confidences,
                          size_t n, double timestamp_s, int64_t* track_ids) {
  if (!tracker) return null_arg("tracker");
  if (n > 0 && (!envelopes || !confidences || !track_ids)) {
    return null_arg("envelopes/confidences/track_ids");
  }
  return guarded([&] {
    std::vector<trunkfuse::UnifiedTrunk> trunks(n);
    for (size_t i = 0; i < n; ++i) {
      trunks[i].envelope = trunkfuse::canonicalize_obb(to_box(envelopes[i]));
      trunks[i].confidence = confidences[i];
      const auto ends = trunkfuse::obb_short_edge_midpoints(trunks[i].envelope);
      trunks[i].endpoints = {ends[0], ends[1]};
    }
    const auto tracked = tracker->tracker.step(trunks, timestamp_s);
    for (size_t i = 0; i < n; ++i) track_ids[i] = 0;
    for (const auto& t : tracked) track_ids[t.input_index] = t.track_id;
  });
}

}  // extern "C"
