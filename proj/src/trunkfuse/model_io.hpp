// Copyright 2026 The trunkfuse Authors
// SPDX-License-Identifier: Apache-2.0

// Line-delimited JSON interchange: one record per frame, each tagged with
// "format_version". Parsing validates every record against the type
// invariants in model.hpp and reports the offending line and field.

#pragma once

#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "trunkfuse/model.hpp"

namespace trunkfuse {

inline constexpr int kFormatVersion = 1;

using Json = nlohmann::ordered_json;

// Streams non-empty lines of a JSONL file as parsed JSON objects.
class JsonlReader {
 public:
  explicit JsonlReader(const std::filesystem::path& path);

  // False at end of file. Throws ParseError on malformed lines.
  bool next(Json& record);
  std::size_t line() const { return line_; }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::ifstream in_;
  std::size_t line_ = 0;
};

class JsonlWriter {
 public:
  explicit JsonlWriter(const std::filesystem::path& path);
  void write(const Json& record);
  void close();

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

// Record-level conversion. `where` prefixes error messages (e.g. "line 3").
Json to_json(const OrientedBox& box);
Json to_json(std::span<const Point> pts);
Json to_json(const SceneParameters& scene);
Json to_json(const DetectionFrame& frame);
Json to_json(const GroundTruthFrame& frame);
Json to_json(const UnifiedTrunk& trunk);
Json to_json(const FusedFrame& frame);
Json to_json(const TrackedFrame& frame);
Json to_json(const AnnotationFrame& frame);

DetectionFrame parse_detection_frame(const Json& j, const std::string& where);
GroundTruthFrame parse_ground_truth_frame(const Json& j, const std::string& where,
                                          bool check_quantity = true);
UnifiedTrunk parse_unified_trunk(const Json& j, const std::string& field);
FusedFrame parse_fused_frame(const Json& j, const std::string& where);
TrackedFrame parse_tracked_frame(const Json& j, const std::string& where);
AnnotationFrame parse_annotation_frame(const Json& j, const std::string& where);

struct LoadOptions {
  bool check_scene_quantity = true;
};

std::vector<DetectionFrame> load_detections(const std::filesystem::path& path);
std::vector<GroundTruthFrame> load_ground_truth(const std::filesystem::path& path,
                                                LoadOptions options = {});
std::vector<FusedFrame> load_fused(const std::filesystem::path& path);
std::vector<TrackedFrame> load_tracks(const std::filesystem::path& path);
std::vector<AnnotationFrame> load_annotations(const std::filesystem::path& path);

void save_detections(const std::filesystem::path& path,
                     std::span<const DetectionFrame> frames);
void save_ground_truth(const std::filesystem::path& path,
                       std::span<const GroundTruthFrame> frames);
void save_fused(const std::filesystem::path& path, std::span<const FusedFrame> frames);
void save_tracks(const std::filesystem::path& path,
                 std::span<const TrackedFrame> frames);
void save_annotations(const std::filesystem::path& path,
                      std::span<const AnnotationFrame> frames);

// Lowercase hex SHA-256 of the file contents.
std::string file_sha256(const std::filesystem::path& path);

}  // namespace trunkfuse
