// Copyright 2026 The trunkfuse Authors
// SPDX-License-Identifier: Apache-2.0

#include "trunkfuse/model_io.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>

#include <openssl/evp.h>

#include "trunkfuse/error.hpp"

namespace trunkfuse {

namespace {

[[noreturn]] void schema_fail(const std::string& where, const std::string& field,
                              const std::string& what) {
  throw Error(ErrorCode::kSchemaError, where + ": " + field + ": " + what);
}

const Json& require(const Json& j, const char* key, const std::string& where,
                    const std::string& field) {
  if (!j.is_object()) schema_fail(where, field, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) {
    schema_fail(where, field.empty() ? key : field + "." + key, "missing field");
  }
  return *it;
}

std::string join(const std::string& field, const std::string& key) {
  return field.empty() ? key : field + "." + key;
}

double as_number(const Json& v, const std::string& where, const std::string& field) {
  if (!v.is_number()) schema_fail(where, field, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) schema_fail(where, field, "must be finite");
  return d;
}

std::int64_t as_integer(const Json& v, const std::string& where,
                        const std::string& field) {
  if (!v.is_number_integer()) schema_fail(where, field, "expected an integer");
  return v.get<std::int64_t>();
}

std::string as_string(const Json& v, const std::string& where,
                      const std::string& field) {
  if (!v.is_string()) schema_fail(where, field, "expected a string");
  return v.get<std::string>();
}

Point parse_point(const Json& v, const std::string& where, const std::string& field) {
  if (!v.is_array() || v.size() != 2) {
    schema_fail(where, field, "expected [x, y]");
  }
  return {as_number(v[0], where, field + "[0]"), as_number(v[1], where, field + "[1]")};
}

std::vector<Point> parse_points(const Json& v, const std::string& where,
                                const std::string& field) {
  if (!v.is_array()) schema_fail(where, field, "expected an array of [x, y]");
  std::vector<Point> pts;
  pts.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    pts.push_back(parse_point(v[i], where, field + "[" + std::to_string(i) + "]"));
  }
  return pts;
}

Contour parse_contour(const Json& v, const std::string& where,
                      const std::string& field) {
  try {
    return Contour(parse_points(v, where, field));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kSchemaError) throw;
    schema_fail(where, field, e.what());
  }
}

OrientedBox parse_obb(const Json& v, const std::string& where,
                      const std::string& field) {
  if (!v.is_array() || v.size() != 5) {
    schema_fail(where, field, "expected [cx, cy, w, h, angle_rad]");
  }
  std::array<double, 5> x{};
  for (std::size_t i = 0; i < 5; ++i) {
    x[i] = as_number(v[i], where, field + "[" + std::to_string(i) + "]");
  }
  try {
    return canonicalize_obb({x[0], x[1], x[2], x[3], x[4]});
  } catch (const Error& e) {
    schema_fail(where, field, e.what());
  }
}

void check_version(const Json& j, const std::string& where) {
  if (!j.is_object()) schema_fail(where, "record", "expected a JSON object");
  auto it = j.find("format_version");
  if (it == j.end()) return;
  if (!it->is_number_integer() || it->get<int>() != kFormatVersion) {
    schema_fail(where, "format_version",
                "unsupported version (expected " + std::to_string(kFormatVersion) + ")");
  }
}

Intensity parse_level(const Json& j, const char* key, const std::string& where,
                      const std::string& field) {
  const std::string f = join(field, key);
  const std::string s = as_string(require(j, key, where, field), where, f);
  auto level = parse_intensity(s);
  if (!level) schema_fail(where, f, "unknown intensity '" + s + "'");
  return *level;
}

SceneParameters parse_scene(const Json& j, const std::string& where,
                            const std::string& field) {
  SceneParameters s;
  s.entropy = parse_level(j, "entropy", where, field);
  s.quantity = parse_level(j, "quantity", where, field);
  s.distance = parse_level(j, "distance", where, field);
  s.irregularity = parse_level(j, "irregularity", where, field);
  const Json& snow = require(j, "snow", where, field);
  if (!snow.is_boolean()) schema_fail(where, join(field, "snow"), "expected a boolean");
  s.snow = snow.get<bool>();
  return s;
}

std::optional<ImageSize> parse_image_size(const Json& j, const std::string& where) {
  auto it = j.find("image_size");
  if (it == j.end()) return std::nullopt;
  if (!it->is_array() || it->size() != 2) {
    schema_fail(where, "image_size", "expected [width, height]");
  }
  ImageSize size{static_cast<int>(as_integer((*it)[0], where, "image_size[0]")),
                 static_cast<int>(as_integer((*it)[1], where, "image_size[1]"))};
  if (size.width <= 0 || size.height <= 0) {
    schema_fail(where, "image_size", "must be positive");
  }
  return size;
}

void frame_header(const Json& j, const std::string& where, std::int64_t& frame_id,
                  double& timestamp) {
  check_version(j, where);
  frame_id = as_integer(require(j, "frame_id", where, ""), where, "frame_id");
  timestamp = as_number(require(j, "timestamp_s", where, ""), where, "timestamp_s");
}

Json header_json(std::int64_t frame_id, double timestamp) {
  Json j;
  j["format_version"] = kFormatVersion;
  j["frame_id"] = frame_id;
  j["timestamp_s"] = timestamp;
  return j;
}

Json component_json(const ComponentInstance& c) {
  Json j;
  j["obb"] = to_json(c.obb);
  if (c.contour) j["contour"] = to_json(c.contour->vertices());
  j["confidence"] = c.confidence;
  return j;
}

ComponentInstance parse_component(const Json& j, ComponentClass cls,
                                  const std::string& where, const std::string& field) {
  ComponentInstance c;
  c.cls = cls;
  c.obb = parse_obb(require(j, "obb", where, field), where, join(field, "obb"));
  if (auto it = j.find("contour"); it != j.end()) {
    c.contour = parse_contour(*it, where, join(field, "contour"));
  }
  c.confidence = as_number(require(j, "confidence", where, field), where,
                           join(field, "confidence"));
  if (c.confidence < 0.0 || c.confidence > 1.0) {
    schema_fail(where, join(field, "confidence"), "outside [0, 1]");
  }
  return c;
}

template <typename Frame>
std::vector<Frame> order_frames(std::vector<Frame> frames,
                                const std::filesystem::path& path) {
  std::stable_sort(frames.begin(), frames.end(), [](const Frame& a, const Frame& b) {
    return a.timestamp_s < b.timestamp_s;
  });
  std::set<std::int64_t> ids;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (!ids.insert(frames[i].frame_id).second) {
      schema_fail(path.string(), "frame_id",
                  "duplicate frame_id " + std::to_string(frames[i].frame_id));
    }
    if (i > 0 && frames[i].timestamp_s == frames[i - 1].timestamp_s) {
      schema_fail(path.string(), "timestamp_s",
                  "timestamps must be strictly increasing (frame " +
                      std::to_string(frames[i].frame_id) + ")");
    }
  }
  return frames;
}

template <typename Frame, typename Parse>
std::vector<Frame> load_all(const std::filesystem::path& path, Parse parse) {
  JsonlReader reader(path);
  std::vector<Frame> frames;
  Json record;
  while (reader.next(record)) {
    frames.push_back(parse(record, path.string() + " line " +
                                       std::to_string(reader.line())));
  }
  return order_frames(std::move(frames), path);
}

template <typename Frame>
void save_all(const std::filesystem::path& path, std::span<const Frame> frames) {
  JsonlWriter writer(path);
  for (const auto& f : frames) writer.write(to_json(f));
  writer.close();
}

}  // namespace

JsonlReader::JsonlReader(const std::filesystem::path& path)
    : path_(path), in_(path) {
  if (!in_) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
}

bool JsonlReader::next(Json& record) {
  std::string text;
  while (std::getline(in_, text)) {
    ++line_;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      record = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::kParseError, path_.string() + " line " +
                                              std::to_string(line_) + ": " + e.what());
    }
    return true;
  }
  if (in_.bad()) throw Error(ErrorCode::kIoError, "read failed: " + path_.string());
  return false;
}

JsonlWriter::JsonlWriter(const std::filesystem::path& path)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
  if (!out_) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
}

void JsonlWriter::write(const Json& record) {
  out_ << record.dump() << '\n';
  if (!out_) throw Error(ErrorCode::kIoError, "write failed: " + path_.string());
}

void JsonlWriter::close() {
  out_.close();
  if (out_.fail()) throw Error(ErrorCode::kIoError, "close failed: " + path_.string());
}

Json to_json(const OrientedBox& box) {
  return Json::array({box.cx, box.cy, box.width, box.height, box.angle});
}

Json to_json(std::span<const Point> pts) {
  Json arr = Json::array();
  for (const Point& p : pts) arr.push_back(Json::array({p.x, p.y}));
  return arr;
}

Json to_json(const SceneParameters& scene) {
  Json j;
  j["entropy"] = to_string(scene.entropy);
  j["quantity"] = to_string(scene.quantity);
  j["distance"] = to_string(scene.distance);
  j["irregularity"] = to_string(scene.irregularity);
  j["snow"] = scene.snow;
  return j;
}

Json to_json(const DetectionFrame& frame) {
  Json j = header_json(frame.frame_id, frame.timestamp_s);
  Json dets = Json::array();
  for (const auto& d : frame.detections) {
    Json dj;
    dj["class"] = to_string(d.cls);
    dj["confidence"] = d.confidence;
    if (d.obb) dj["obb"] = to_json(*d.obb);
    if (d.contour) dj["contour"] = to_json(d.contour->vertices());
    dj["source"] = to_string(d.source);
    dets.push_back(std::move(dj));
  }
  j["detections"] = std::move(dets);
  return j;
}

Json to_json(const GroundTruthFrame& frame) {
  Json j = header_json(frame.frame_id, frame.timestamp_s);
  if (frame.scene) j["scene"] = to_json(*frame.scene);
  if (frame.image_size) {
    j["image_size"] = Json::array({frame.image_size->width, frame.image_size->height});
  }
  Json insts = Json::array();
  for (const auto& inst : frame.instances) {
    Json ij;
    ij["trunk_id"] = inst.trunk_id;
    Json comps = Json::object();
    for (const auto& [cls, contour] : inst.components) {
      comps[std::string(to_string(cls))] = to_json(contour.vertices());
    }
    ij["components"] = std::move(comps);
    insts.push_back(std::move(ij));
  }
  j["instances"] = std::move(insts);
  return j;
}

Json to_json(const UnifiedTrunk& trunk) {
  Json j;
  for (ComponentClass cls : kComponentClasses) {
    if (const auto& c = trunk.component(cls)) {
      j[std::string(to_string(cls))] = component_json(*c);
    }
  }
  j["envelope"] = to_json(trunk.envelope);
  j["endpoints"] = to_json(std::span<const Point>(trunk.endpoints));
  if (trunk.cut_center) {
    j["cut_center"] = Json::array({trunk.cut_center->x, trunk.cut_center->y});
  }
  j["confidence"] = trunk.confidence;
  return j;
}

Json to_json(const FusedFrame& frame) {
  Json j = header_json(frame.frame_id, frame.timestamp_s);
  Json arr = Json::array();
  for (const auto& t : frame.trunks) arr.push_back(Json{{"trunk", to_json(t)}});
  j["trunks"] = std::move(arr);
  return j;
}

Json to_json(const TrackedFrame& frame) {
  Json j = header_json(frame.frame_id, frame.timestamp_s);
  Json arr = Json::array();
  for (const auto& t : frame.tracks) {
    Json tj;
    tj["track_id"] = t.track_id;
    tj["trunk"] = to_json(t.trunk);
    arr.push_back(std::move(tj));
  }
  j["tracks"] = std::move(arr);
  return j;
}

Json to_json(const AnnotationFrame& frame) {
  Json j = header_json(frame.frame_id, frame.timestamp_s);
  if (frame.scene) j["scene"] = to_json(*frame.scene);
  if (frame.image_size) {
    j["image_size"] = Json::array({frame.image_size->width, frame.image_size->height});
  }
  Json arr = Json::array();
  for (const auto& p : frame.primitives) {
    Json pj;
    pj["kind"] = to_string(p.kind);
    pj["trunk_id"] = p.trunk_id;
    pj["points"] = to_json(p.points);
    arr.push_back(std::move(pj));
  }
  j["primitives"] = std::move(arr);
  return j;
}

DetectionFrame parse_detection_frame(const Json& j, const std::string& where) {
  DetectionFrame frame;
  frame_header(j, where, frame.frame_id, frame.timestamp_s);
  const Json& dets = require(j, "detections", where, "");
  if (!dets.is_array()) schema_fail(where, "detections", "expected an array");
  for (std::size_t i = 0; i < dets.size(); ++i) {
    const std::string field = "detections[" + std::to_string(i) + "]";
    const Json& dj = dets[i];
    Detection d;
    const std::string cls = as_string(require(dj, "class", where, field), where,
                                      field + ".class");
    auto parsed_cls = parse_component_class(cls);
    if (!parsed_cls) schema_fail(where, field + ".class", "unknown class '" + cls + "'");
    d.cls = *parsed_cls;
    d.confidence = as_number(require(dj, "confidence", where, field), where,
                             field + ".confidence");
    const std::string src = as_string(require(dj, "source", where, field), where,
                                      field + ".source");
    auto parsed_src = parse_task_source(src);
    if (!parsed_src) schema_fail(where, field + ".source", "unknown source '" + src + "'");
    d.source = *parsed_src;
    if (auto it = dj.find("obb"); it != dj.end()) {
      d.obb = parse_obb(*it, where, field + ".obb");
    }
    if (auto it = dj.find("contour"); it != dj.end()) {
      d.contour = parse_contour(*it, where, field + ".contour");
    }
    try {
      validate(d, field);
    } catch (const Error& e) {
      throw with_context(e, where);
    }
    frame.detections.push_back(std::move(d));
  }
  return frame;
}

GroundTruthFrame parse_ground_truth_frame(const Json& j, const std::string& where,
                                          bool check_quantity) {
  GroundTruthFrame frame;
  frame_header(j, where, frame.frame_id, frame.timestamp_s);
  if (auto it = j.find("scene"); it != j.end()) {
    frame.scene = parse_scene(*it, where, "scene");
  }
  frame.image_size = parse_image_size(j, where);
  const Json& insts = require(j, "instances", where, "");
  if (!insts.is_array()) schema_fail(where, "instances", "expected an array");
  for (std::size_t i = 0; i < insts.size(); ++i) {
    const std::string field = "instances[" + std::to_string(i) + "]";
    const Json& ij = insts[i];
    GroundTruthInstance inst;
    inst.trunk_id = as_integer(require(ij, "trunk_id", where, field), where,
                               field + ".trunk_id");
    const Json& comps = require(ij, "components", where, field);
    if (!comps.is_object()) schema_fail(where, field + ".components", "expected an object");
    for (auto it = comps.begin(); it != comps.end(); ++it) {
      const std::string cf = field + ".components." + it.key();
      auto cls = parse_component_class(it.key());
      if (!cls) schema_fail(where, cf, "unknown class '" + it.key() + "'");
      inst.components[*cls] = parse_contour(it.value(), where, cf);
    }
    frame.instances.push_back(std::move(inst));
  }
  try {
    validate(frame, check_quantity);
  } catch (const Error& e) {
    throw with_context(e, where);
  }
  return frame;
}

UnifiedTrunk parse_unified_trunk(const Json& j, const std::string& field) {
  // `field` doubles as location prefix here; callers pass "where: path".
  const std::string where = field;
  UnifiedTrunk t;
  for (ComponentClass cls : kComponentClasses) {
    const std::string key(to_string(cls));
    if (auto it = j.find(key); it != j.end()) {
      t.component(cls) = parse_component(*it, cls, where, "trunk." + key);
    }
  }
  if (t.component_count() == 0) schema_fail(where, "trunk", "trunk has no components");
  t.envelope = parse_obb(require(j, "envelope", where, "trunk"), where, "trunk.envelope");
  const Json& ep = require(j, "endpoints", where, "trunk");
  if (!ep.is_array() || ep.size() != 2) {
    schema_fail(where, "trunk.endpoints", "expected exactly two points");
  }
  t.endpoints = {parse_point(ep[0], where, "trunk.endpoints[0]"),
                 parse_point(ep[1], where, "trunk.endpoints[1]")};
  if (auto it = j.find("cut_center"); it != j.end()) {
    t.cut_center = parse_point(*it, where, "trunk.cut_center");
  }
  t.confidence = as_number(require(j, "confidence", where, "trunk"), where,
                           "trunk.confidence");
  return t;
}

FusedFrame parse_fused_frame(const Json& j, const std::string& where) {
  FusedFrame frame;
  frame_header(j, where, frame.frame_id, frame.timestamp_s);
  const Json& arr = require(j, "trunks", where, "");
  if (!arr.is_array()) schema_fail(where, "trunks", "expected an array");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    frame.trunks.push_back(parse_unified_trunk(
        require(arr[i], "trunk", where, "trunks[" + std::to_string(i) + "]"),
        where + ": trunks[" + std::to_string(i) + "]"));
  }
  return frame;
}

TrackedFrame parse_tracked_frame(const Json& j, const std::string& where) {
  TrackedFrame frame;
  frame_header(j, where, frame.frame_id, frame.timestamp_s);
  const Json& arr = require(j, "tracks", where, "");
  if (!arr.is_array()) schema_fail(where, "tracks", "expected an array");
  std::set<std::int64_t> ids;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string field = "tracks[" + std::to_string(i) + "]";
    TrackedTrunk t;
    t.track_id = as_integer(require(arr[i], "track_id", where, field), where,
                            field + ".track_id");
    if (t.track_id <= 0) schema_fail(where, field + ".track_id", "must be positive");
    if (!ids.insert(t.track_id).second) {
      schema_fail(where, field + ".track_id", "duplicate track id in frame");
    }
    t.trunk = parse_unified_trunk(require(arr[i], "trunk", where, field),
                                  where + ": " + field);
    frame.tracks.push_back(std::move(t));
  }
  return frame;
}

AnnotationFrame parse_annotation_frame(const Json& j, const std::string& where) {
  AnnotationFrame frame;
  frame_header(j, where, frame.frame_id, frame.timestamp_s);
  if (auto it = j.find("scene"); it != j.end()) {
    frame.scene = parse_scene(*it, where, "scene");
  }
  frame.image_size = parse_image_size(j, where);
  const Json& arr = require(j, "primitives", where, "");
  if (!arr.is_array()) schema_fail(where, "primitives", "expected an array");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string field = "primitives[" + std::to_string(i) + "]";
    PointPrimitive p;
    const std::string kind = as_string(require(arr[i], "kind", where, field), where,
                                       field + ".kind");
    auto parsed = parse_primitive_kind(kind);
    if (!parsed) schema_fail(where, field + ".kind", "unknown kind '" + kind + "'");
    p.kind = *parsed;
    p.trunk_id = as_integer(require(arr[i], "trunk_id", where, field), where,
                            field + ".trunk_id");
    p.points = parse_points(require(arr[i], "points", where, field), where,
                            field + ".points");
    try {
      validate(p, field);
    } catch (const Error& e) {
      throw with_context(e, where);
    }
    frame.primitives.push_back(std::move(p));
  }
  return frame;
}

std::vector<DetectionFrame> load_detections(const std::filesystem::path& path) {
  return load_all<DetectionFrame>(path, parse_detection_frame);
}

std::vector<GroundTruthFrame> load_ground_truth(const std::filesystem::path& path,
                                                LoadOptions options) {
  return load_all<GroundTruthFrame>(path, [&](const Json& j, const std::string& w) {
    return parse_ground_truth_frame(j, w, options.check_scene_quantity);
  });
}

std::vector<FusedFrame> load_fused(const std::filesystem::path& path) {
  return load_all<FusedFrame>(path, parse_fused_frame);
}

std::vector<TrackedFrame> load_tracks(const std::filesystem::path& path) {
  return load_all<TrackedFrame>(path, parse_tracked_frame);
}

std::vector<AnnotationFrame> load_annotations(const std::filesystem::path& path) {
  return load_all<AnnotationFrame>(path, parse_annotation_frame);
}

void save_detections(const std::filesystem::path& path,
                     std::span<const DetectionFrame> frames) {
  save_all(path, frames);
}

void save_ground_truth(const std::filesystem::path& path,
                       std::span<const GroundTruthFrame> frames) {
  save_all(path, frames);
}

void save_fused(const std::filesystem::path& path, std::span<const FusedFrame> frames) {
  save_all(path, frames);
}

void save_tracks(const std::filesystem::path& path,
                 std::span<const TrackedFrame> frames) {
  save_all(path, frames);
}

void save_annotations(const std::filesystem::path& path,
                      std::span<const AnnotationFrame> frames) {
  save_all(path, frames);
}

std::string file_sha256(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(),
                                                              EVP_MD_CTX_free);
  EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md.data(), &len);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[md[i] >> 4]);
    out.push_back(kHex[md[i] & 0xF]);
  }
  return out;
}

}  // namespace trunkfuse
