/* Copyright 2026 The trunkfuse Authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * C interface to trunkfuse: fusion of oriented boxes and instance contours
 * of log components into unified trunks, tracking, evaluation, annotation
 * export and scene simulation.
 *
 * Every function returning tf_status leaves a message for the calling
 * thread in tf_last_error() when it fails. Handles are opaque and not
 * thread-safe; distinct handles may be used from distinct threads.
 */

#ifndef TRUNKFUSE_TRUNKFUSE_H_
#define TRUNKFUSE_TRUNKFUSE_H_

#include <stddef.h>
#include <stdint.h>

#if defined(TRUNKFUSE_BUILDING_LIBRARY)
#define TF_API __attribute__((visibility("default")))
#else
#define TF_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tf_status {
  TF_OK = 0,
  TF_ERR_NON_POSITIVE_EXTENT = 1,
  TF_ERR_DEGENERATE_GEOMETRY = 2,
  TF_ERR_ZERO_LENGTH_SEGMENT = 3,
  TF_ERR_TOO_FEW_POINTS = 4,
  TF_ERR_NOT_AN_ELLIPSE = 5,
  TF_ERR_EMPTY_INPUT = 6,
  TF_ERR_PARSE = 7,
  TF_ERR_SCHEMA = 8,
  TF_ERR_IO = 9,
  TF_ERR_EMPTY_GROUP = 10,
  TF_ERR_NON_MONOTONIC_TIMESTAMP = 11,
  TF_ERR_EMPTY_INSTANCES = 12,
  TF_ERR_FRAME_MISMATCH = 13,
  TF_ERR_MISSING_SCENE_PARAMETERS = 14,
  TF_ERR_UNPAIRED_EDGE = 15,
  TF_ERR_MARKER_OUTSIDE_REGION = 16,
  TF_ERR_SELF_INTERSECTION = 17,
  TF_ERR_INVALID_SPEC = 18,
  TF_ERR_INVALID_CONFIG = 19,
  TF_ERR_INVALID_ARGUMENT = 100,
  TF_ERR_BUFFER_TOO_SMALL = 101,
  TF_ERR_INTERNAL = 102
} tf_status;

/* Name of a status, e.g. "SchemaError". Never NULL. */
TF_API const char* tf_status_name(tf_status status);
/* Message of the last failure on this thread; empty after a success. */
TF_API const char* tf_last_error(void);
TF_API const char* tf_version(void);

/* ---- Configuration ---------------------------------------------------- */

typedef struct tf_config tf_config;

/* Called once per non-fatal diagnostic (annotation warnings and similar). */
typedef void (*tf_message_fn)(const char* message, void* user);

TF_API tf_status tf_config_create(tf_config** out);
TF_API void tf_config_destroy(tf_config* config);
TF_API tf_status tf_config_set(tf_config* config, const char* key, const char* value);
/* Flat `key = value` file; later calls override earlier values. */
TF_API tf_status tf_config_load(tf_config* config, const char* path);
/* Copies the value with its terminator. `needed` (optional) receives the
 * required size including the terminator. */
TF_API tf_status tf_config_get(const tf_config* config, const char* key, char* buffer,
                               size_t buffer_size, size_t* needed);
TF_API tf_status tf_config_validate(const tf_config* config);
TF_API void tf_config_set_message_handler(tf_config* config, tf_message_fn fn, void* user);
/* Number of keys and the name of key i, in documentation order. */
TF_API size_t tf_config_key_count(void);
TF_API const char* tf_config_key_name(size_t index);

/* ---- File pipelines --------------------------------------------------- */

typedef struct tf_run_summary {
  size_t frames;
  size_t objects;
  size_t warnings;
} tf_run_summary;

/* `summary` may be NULL in every call below. */
TF_API tf_status tf_run_fuse(const tf_config* config, const char* detections_path,
                             const char* fused_path, tf_run_summary* summary);
/* Input holds detections or fused trunks, in time order. */
TF_API tf_status tf_run_track(const tf_config* config, const char* input_path,
                              const char* tracks_path, tf_run_summary* summary);
/* Writes the JSON report and a text summary next to it. */
TF_API tf_status tf_run_eval_det(const tf_config* config, const char* predictions_path,
                                 const char* ground_truth_path, const char* report_path);
TF_API tf_status tf_run_eval_mot(const tf_config* config, const char* tracks_path,
                                 const char* ground_truth_path, const char* report_path);
/* `targets_path` may be NULL. */
TF_API tf_status tf_run_annotate(const tf_config* config, const char* annotations_path,
                                 const char* ground_truth_path, const char* targets_path,
                                 tf_run_summary* summary);
/* `detections_path` and `annotations_path` may be NULL. */
TF_API tf_status tf_run_simulate(const tf_config* config, const char* ground_truth_path,
                                 const char* detections_path, const char* annotations_path,
                                 tf_run_summary* summary);

/* ---- Geometry --------------------------------------------------------- */

typedef struct tf_obb {
  double cx;
  double cy;
  double width;
  double height;
  double angle; /* radians, direction of the width axis */
} tf_obb;

/* Canonical form: width >= height, angle in [0, pi). */
TF_API tf_status tf_obb_canonicalize(const tf_obb* box, tf_obb* out);
TF_API tf_status tf_obb_iou(const tf_obb* a, const tf_obb* b, double* out);

/* Row-major rows x cols cost. row_ind and col_ind need min(rows, cols)
 * entries; count receives the number of pairs written. */
TF_API tf_status tf_linear_sum_assignment(const double* cost, size_t rows, size_t cols,
                                          size_t* row_ind, size_t* col_ind, size_t* count);

/* ---- Streaming tracker ------------------------------------------------ */

typedef struct tf_tracker tf_tracker;

TF_API tf_status tf_tracker_create(const tf_config* config, tf_tracker** out);
TF_API void tf_tracker_destroy(tf_tracker* tracker);
/* One frame of trunk envelopes and confidences. track_ids receives n
 * entries: the track of each input, or 0 when the input is not tracked. */
TF_API tf_status tf_tracker_step(tf_tracker* tracker, const tf_obb* envelopes,
                                 const double* confidences, size_t n, double timestamp_s,
                                 int64_t* track_ids);

#ifdef __cplusplus
}
#endif

#endif /* TRUNKFUSE_TRUNKFUSE_H_ */
