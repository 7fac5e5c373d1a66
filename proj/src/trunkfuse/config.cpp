// Copyright 2026 The trunkfuse Authors
// SPDX-License-Identifier: Apache-2.0

#include "trunkfuse/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>

#include "trunkfuse/error.hpp"

namespace trunkfuse {

namespace {

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const std::string& expected) {
  throw Error(ErrorCode::kInvalidConfig, key + ": '" + value + "' is not " + expected);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || !std::isfinite(out)) {
    bad_value(key, v, "a number");
  }
  return out;
}

std::int64_t parse_int(const std::string& key, const std::string& v) {
  std::int64_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) bad_value(key, v, "an integer");
  return out;
}

std::uint64_t parse_uint(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) bad_value(key, v, "a non-negative integer");
  return out;
}

std::size_t parse_count(const std::string& key, const std::string& v) {
  return static_cast<std::size_t>(parse_uint(key, v));
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  bad_value(key, v, "true or false");
}

Intensity parse_level(const std::string& key, const std::string& v) {
  if (auto i = parse_intensity(v)) return *i;
  bad_value(key, v, "low, mid or high");
}

std::string fmt(double v) {
  char buf[32];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

template <typename Int>
std::string fmt_int(Int v) {
  return std::to_string(v);
}

std::string fmt(bool v) { return v ? "true" : "false"; }

struct Key {
  std::string name;
  std::function<void(Config&, const std::string&)> set;
  std::function<std::string(const Config&)> get;
};

#define TF_DOUBLE(NAME, FIELD)                                                         \
  Key {                                                                                \
    NAME, [](Config& c, const std::string& v) { c.FIELD = parse_double(NAME, v); },   \
        [](const Config& c) { return fmt(c.FIELD); }                                   \
  }

#define TF_LEVEL(NAME, FIELD)                                                          \
  Key {                                                                                \
    NAME, [](Config& c, const std::string& v) { c.FIELD = parse_level(NAME, v); },    \
        [](const Config& c) { return std::string(to_string(c.FIELD)); }                \
  }

const std::vector<Key>& key_table() {
  static const std::vector<Key> table = {
      TF_DOUBLE("confidence-thresh", fusion.confidence_threshold),
      TF_DOUBLE("task-match-min-iou", fusion.task_match_min_iou),
      TF_DOUBLE("component-match-min-affinity", fusion.component_match_min_affinity),
      Key{"unmatched-policy",
          [](Config& c, const std::string& v) {
            if (v == "keep-any") {
              c.fusion.unmatched_policy = UnmatchedPolicy::kKeepAny;
            } else if (v == "require-both") {
              c.fusion.unmatched_policy = UnmatchedPolicy::kRequireBoth;
            } else {
              bad_value("unmatched-policy", v, "keep-any or require-both");
            }
          },
          [](const Config& c) {
            return std::string(c.fusion.unmatched_policy == UnmatchedPolicy::kKeepAny
                                   ? "keep-any"
                                   : "require-both");
          }},
      Key{"confidence-merge",
          [](Config& c, const std::string& v) {
            if (v == "max") {
              c.fusion.confidence_merge = ConfidenceMerge::kMax;
            } else if (v == "mean") {
              c.fusion.confidence_merge = ConfidenceMerge::kMean;
            } else {
              bad_value("confidence-merge", v, "max or mean");
            }
          },
          [](const Config& c) {
            return std::string(c.fusion.confidence_merge == ConfidenceMerge::kMax ? "max"
                                                                                  : "mean");
          }},
      TF_DOUBLE("track-high-thresh", tracker.track_high_thresh),
      TF_DOUBLE("track-low-thresh", tracker.track_low_thresh),
      TF_DOUBLE("new-track-thresh", tracker.new_track_thresh),
      TF_DOUBLE("match-thresh", tracker.match_thresh),
      TF_DOUBLE("low-match-thresh", tracker.low_match_thresh),
      Key{"track-buffer",
          [](Config& c, const std::string& v) {
            c.tracker.track_buffer_frames = static_cast<int>(parse_int("track-buffer", v));
          },
          [](const Config& c) { return fmt_int(c.tracker.track_buffer_frames); }},
      TF_DOUBLE("frame-rate", tracker.frame_rate),
      TF_DOUBLE("std-position", tracker.noise.position),
      TF_DOUBLE("std-velocity", tracker.noise.velocity),
      TF_DOUBLE("std-angle", tracker.noise.angle),
      TF_DOUBLE("std-angle-velocity", tracker.noise.angle_velocity),
      TF_DOUBLE("iou-thresh", iou_thresh),
      TF_DOUBLE("sim-thresh", sim_thresh),
      Key{"raster-size",
          [](Config& c, const std::string& v) {
            c.eval.raster_size = static_cast<int>(parse_int("raster-size", v));
          },
          [](const Config& c) { return fmt_int(c.eval.raster_size); }},
      Key{"threads",
          [](Config& c, const std::string& v) {
            c.eval.threads = static_cast<int>(parse_int("threads", v));
          },
          [](const Config& c) { return fmt_int(c.eval.threads); }},
      Key{"seed", [](Config& c, const std::string& v) { c.seed = parse_uint("seed", v); },
          [](const Config& c) { return fmt_int(c.seed); }},
      TF_DOUBLE("position-jitter-px", noise.position_jitter_px),
      TF_DOUBLE("size-jitter-frac", noise.size_jitter_frac),
      TF_DOUBLE("angle-jitter-rad", noise.angle_jitter_rad),
      TF_DOUBLE("dropout-prob", noise.dropout_prob),
      TF_DOUBLE("clutter-rate", noise.clutter_rate),
      TF_DOUBLE("confidence-tp", noise.confidence_tp),
      TF_DOUBLE("confidence-fp", noise.confidence_fp),
      TF_DOUBLE("confidence-sigma", noise.confidence_sigma),
      TF_LEVEL("entropy", simulation.scene.entropy),
      TF_LEVEL("quantity", simulation.scene.quantity),
      TF_LEVEL("distance", simulation.scene.distance),
      TF_LEVEL("irregularity", simulation.scene.irregularity),
      Key{"snow",
          [](Config& c, const std::string& v) { c.simulation.scene.snow = parse_bool("snow", v); },
          [](const Config& c) { return fmt(c.simulation.scene.snow); }},
      Key{"image-width",
          [](Config& c, const std::string& v) {
            c.simulation.image_size.width = static_cast<int>(parse_int("image-width", v));
          },
          [](const Config& c) { return fmt_int(c.simulation.image_size.width); }},
      Key{"image-height",
          [](Config& c, const std::string& v) {
            c.simulation.image_size.height = static_cast<int>(parse_int("image-height", v));
          },
          [](const Config& c) { return fmt_int(c.simulation.image_size.height); }},
      Key{"trunks",
          [](Config& c, const std::string& v) { c.simulation.trunks = parse_count("trunks", v); },
          [](const Config& c) { return fmt_int(c.simulation.trunks); }},
      Key{"frames",
          [](Config& c, const std::string& v) { c.simulation.frames = parse_count("frames", v); },
          [](const Config& c) { return fmt_int(c.simulation.frames); }},
      Key{"scenes",
          [](Config& c, const std::string& v) { c.simulation.scenes = parse_count("scenes", v); },
          [](const Config& c) { return fmt_int(c.simulation.scenes); }},
      Key{"truncation",
          [](Config& c, const std::string& v) {
            c.simulation.truncation = parse_bool("truncation", v);
          },
          [](const Config& c) { return fmt(c.simulation.truncation); }},
      TF_DOUBLE("min-speed", simulation.motion.min_speed_px),
      TF_DOUBLE("max-speed", simulation.motion.max_speed_px),
      TF_DOUBLE("accel-sigma", simulation.motion.accel_sigma_px),
      TF_DOUBLE("spline-density", annotation.spline_density),
      TF_DOUBLE("ellipse-residual-frac", annotation.ellipse_residual_frac),
      TF_DOUBLE("min-width-px", annotation.min_width_px),
      Key{"export-variant",
          [](Config& c, const std::string& v) {
            auto e = parse_export_variant(v);
            if (!e) bad_value("export-variant", v, "three-class, two-class or single-trunk");
            c.export_variant = *e;
          },
          [](const Config& c) { return std::string(to_string(c.export_variant)); }},
      Key{"overlay-dir", [](Config& c, const std::string& v) { c.overlay_dir = v; },
          [](const Config& c) { return c.overlay_dir; }},
  };
  return table;
}

#undef TF_DOUBLE
#undef TF_LEVEL

const Key& find_key(const std::string& name) {
  static const std::map<std::string, const Key*> index = [] {
    std::map<std::string, const Key*> m;
    for (const Key& k : key_table()) m.emplace(k.name, &k);
    return m;
  }();
  auto it = index.find(name);
  if (it == index.end()) throw Error(ErrorCode::kInvalidConfig, "unknown key '" + name + "'");
  return *it->second;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::kInvalidConfig, what);
}

}  // namespace

void Config::set(const std::string& key, const std::string& value) {
  find_key(key).set(*this, trim(value));
}

std::string Config::get(const std::string& key) const { return find_key(key).get(*this); }

void Config::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, path.string() + ": cannot open");
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = path.string() + " line " + std::to_string(n);
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kInvalidConfig, where + ": expected 'key = value'");
    }
    try {
      set(trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const Error& e) {
      throw with_context(e, where);
    }
  }
}

void Config::validate() const {
  fusion.validate();
  tracker.validate();
  noise.validate();
  try {
    simulation.motion.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kInvalidConfig, e.detail());
  }
  require(iou_thresh > 0.0 && iou_thresh <= 1.0, "iou-thresh: must lie in (0, 1]");
  require(sim_thresh > 0.0 && sim_thresh <= 1.0, "sim-thresh: must lie in (0, 1]");
  require(eval.raster_size >= 16 && eval.raster_size <= 16384,
          "raster-size: must lie in [16, 16384]");
  require(eval.threads >= 1 && eval.threads <= 256, "threads: must lie in [1, 256]");
  require(annotation.spline_density > 0.0, "spline-density: must be > 0");
  require(annotation.ellipse_residual_frac >= 0.0, "ellipse-residual-frac: must be >= 0");
  require(annotation.min_width_px >= 0.0, "min-width-px: must be >= 0");
  require(simulation.frames >= 1, "frames: must be at least 1");
  require(simulation.scenes >= 1, "scenes: must be at least 1");
  require(simulation.frames == 1 || simulation.scenes == 1,
          "frames, scenes: a sequence and a scene batch cannot be combined");
  require(simulation.image_size.width >= 64 && simulation.image_size.height >= 64,
          "image-width, image-height: must be at least 64");
  if (simulation.trunks != 0) {
    try {
      scene_spec(*this).validate();
    } catch (const Error& e) {
      throw Error(ErrorCode::kInvalidConfig, e.detail());
    }
  }
}

std::vector<std::pair<std::string, std::string>> Config::entries() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const Key& k : key_table()) out.emplace_back(k.name, k.get(*this));
  return out;
}

const std::vector<std::string>& Config::keys() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const Key& k : key_table()) n.push_back(k.name);
    return n;
  }();
  return names;
}

SceneSpec scene_spec(const Config& cfg) {
  SceneSpec spec;
  spec.scene = cfg.simulation.scene;
  spec.image_size = cfg.simulation.image_size;
  spec.seed = cfg.seed;
  if (cfg.simulation.trunks) spec.trunk_count = cfg.simulation.trunks;
  spec.allow_truncation = cfg.simulation.truncation;
  return spec;
}

}  // namespace trunkfuse
