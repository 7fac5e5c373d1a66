// Copyright 2026 The trunkfuse Authors
// SPDX-License-Identifier: Apache-2.0

// File-to-file pipelines behind the command line and the C API.

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "trunkfuse/config.hpp"
#include "trunkfuse/report.hpp"

namespace trunkfuse {

namespace fs = std::filesystem;

enum class RecordKind { kDetections, kFused, kTracks, kGroundTruth, kAnnotations };

// Kind of a JSONL file, judged by its first record.
RecordKind detect_record_kind(const fs::path& path);

struct RunSummary {
  std::size_t frames = 0;
  std::size_t objects = 0;  // trunks, tracks or instances written
  std::vector<std::string> warnings;
};

RunSummary run_fuse(const Config& cfg, const fs::path& detections, const fs::path& out);

// Reads detections or fused trunks frame by frame, in file order.
RunSummary run_track(const Config& cfg, const fs::path& input, const fs::path& out);

// Detections are scored per task and class; fused trunks as one class plus
// precision and recall on envelopes.
Report eval_det(const Config& cfg, const fs::path& predictions, const fs::path& ground_truth);
// Predictions are tracks, or ground truth read as perfect tracks.
Report eval_mot(const Config& cfg, const fs::path& tracks, const fs::path& ground_truth);

RunSummary run_annotate(const Config& cfg, const fs::path& annotations,
                        const fs::path& ground_truth_out,
                        const std::optional<fs::path>& targets_out = std::nullopt);

struct SimulateOutputs {
  fs::path ground_truth;
  std::optional<fs::path> detections;
  std::optional<fs::path> annotations;
};

RunSummary run_simulate(const Config& cfg, const SimulateOutputs& out);

}  // namespace trunkfuse
