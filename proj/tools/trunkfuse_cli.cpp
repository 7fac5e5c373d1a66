// Copyright 2026 The trunkfuse Authors
// SPDX-License-Identifier: Apache-2.0

// trunkfuse command line: fuse, track, eval-det, eval-mot, annotate, simulate.

#include <cstdio>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "trunkfuse/trunkfuse.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitUsage = 2;

struct ConfigDeleter {
  void operator()(tf_config* c) const { tf_config_destroy(c); }
};
using ConfigPtr = std::unique_ptr<tf_config, ConfigDeleter>;

struct Options {
  std::string config_file;
  std::vector<std::pair<std::string, std::string>> flags;  // key, value in order
  std::vector<std::string> sets;
};

struct Paths {
  std::string input;
  std::string second;
  std::string output;
  std::string targets;
  std::string detections;
  std::string annotations;
};

void add_common(CLI::App* sub, Options& opts) {
  sub->add_option("--config", opts.config_file, "key = value configuration file")
      ->check(CLI::ExistingFile);
  struct Flag {
    const char* name;
    const char* help;
  };
  static const Flag kFlags[] = {
      {"confidence-thresh", "minimum detection confidence (default 0.4)"},
      {"new-track-thresh", "minimum confidence to start a track"},
      {"match-thresh", "association cost gate"},
      {"iou-thresh", "envelope IoU for fused precision and recall"},
      {"raster-size", "raster side for mask metrics when the image size is unknown"},
      {"seed", "simulation and noise seed"},
      {"threads", "worker threads for evaluation"},
      {"overlay-dir", "write per-frame overlay images here"},
  };
  for (const Flag& f : kFlags) {
    const std::string key = f.name;
    sub->add_option_function<std::string>(
        "--" + key, [&opts, key](const std::string& v) { opts.flags.emplace_back(key, v); },
        f.help);
  }
  sub->add_option("--set", opts.sets, "any configuration key, as key=value (repeatable)")
      ->take_all();
}

bool report(tf_status s, const char* what) {
  if (s == TF_OK) return true;
  std::fprintf(stderr, "trunkfuse %s: %s\n", what, tf_last_error());
  return false;
}

void print_message(const char* message, void*) { std::fprintf(stderr, "warning: %s\n", message); }

// defaults < config file < flags; --set entries apply after the named flags.
ConfigPtr build_config(const Options& opts, const char* sub) {
  tf_config* raw = nullptr;
  if (!report(tf_config_create(&raw), sub)) return nullptr;
  ConfigPtr cfg(raw);
  tf_config_set_message_handler(cfg.get(), print_message, nullptr);
  if (!opts.config_file.empty() &&
      !report(tf_config_load(cfg.get(), opts.config_file.c_str()), sub)) {
    return nullptr;
  }
  for (const auto& [key, value] : opts.flags) {
    if (!report(tf_config_set(cfg.get(), key.c_str(), value.c_str()), sub)) return nullptr;
  }
  for (const std::string& kv : opts.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "trunkfuse %s: --set expects key=value, got '%s'\n", sub, kv.c_str());
      return nullptr;
    }
    const std::string key = kv.substr(0, eq);
    const std::string value = kv.substr(eq + 1);
    if (!report(tf_config_set(cfg.get(), key.c_str(), value.c_str()), sub)) return nullptr;
  }
  if (!report(tf_config_validate(cfg.get()), sub)) return nullptr;
  return cfg;
}

void print_summary(const char* sub, const tf_run_summary& s, const char* objects) {
  std::fprintf(stderr, "%s: %zu frames, %zu %s", sub, s.frames, s.objects, objects);
  if (s.warnings) std::fprintf(stderr, ", %zu warnings", s.warnings);
  std::fprintf(stderr, "\n");
}

const char* nullable(const std::string& s) { return s.empty() ? nullptr : s.c_str(); }

std::string key_list() {
  std::string out = "configuration keys:\n";
  for (size_t i = 0; i < tf_config_key_count(); ++i) {
    out += "  ";
    out += tf_config_key_name(i);
    out += '\n';
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fuse, track and evaluate log trunk detections."};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(tf_version()));
  app.footer(key_list());

  Options opts;
  Paths paths;

  CLI::App* fuse = app.add_subcommand("fuse", "detections -> unified trunks");
  fuse->add_option("detections", paths.input, "detections JSONL")->required()->check(CLI::ExistingFile);
  fuse->add_option("-o,--output", paths.output, "fused trunks JSONL")->required();

  CLI::App* track = app.add_subcommand("track", "detections or fused trunks -> tracks");
  track->add_option("input", paths.input, "detections or fused trunks JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  track->add_option("-o,--output", paths.output, "tracks JSONL")->required();

  CLI::App* eval_det = app.add_subcommand("eval-det", "predictions + ground truth -> mAP, P, R");
  eval_det->add_option("predictions", paths.input, "detections, fused trunks or tracks JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  eval_det->add_option("ground-truth", paths.second, "ground truth JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  eval_det->add_option("-o,--output", paths.output, "report JSON")->required();

  CLI::App* eval_mot =
      app.add_subcommand("eval-mot", "tracks + ground truth -> MOTA, IDF1, IDP, IDR, mIoU_c");
  eval_mot->add_option("tracks", paths.input, "tracks JSONL")->required()->check(CLI::ExistingFile);
  eval_mot->add_option("ground-truth", paths.second, "ground truth JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  eval_mot->add_option("-o,--output", paths.output, "report JSON")->required();

  CLI::App* annotate = app.add_subcommand("annotate", "point annotations -> ground truth");
  annotate->add_option("annotations", paths.input, "point annotations JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  annotate->add_option("-o,--output", paths.output, "ground truth JSONL")->required();
  annotate->add_option("--targets", paths.targets, "also write per-component box targets");

  CLI::App* simulate = app.add_subcommand("simulate", "scene parameters -> ground truth + detections");
  simulate->add_option("-o,--output", paths.output, "ground truth JSONL")->required();
  simulate->add_option("--detections", paths.detections, "perturbed detections JSONL");
  simulate->add_option("--annotations", paths.annotations, "point annotations JSONL");

  for (CLI::App* sub : {fuse, track, eval_det, eval_mot, annotate, simulate}) {
    add_common(sub, opts);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "trunkfuse: %s\n\n", e.what());
    CLI::App* failed = &app;
    for (CLI::App* sub : app.get_subcommands()) failed = sub;
    std::fprintf(stderr, "%s", failed->help().c_str());
    return kExitUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  ConfigPtr cfg = build_config(opts, name.c_str());
  if (!cfg) return kExitError;

  tf_run_summary summary{};
  tf_status s = TF_OK;
  if (sub == fuse) {
    s = tf_run_fuse(cfg.get(), paths.input.c_str(), paths.output.c_str(), &summary);
    if (s == TF_OK) print_summary("fuse", summary, "trunks");
  } else if (sub == track) {
    s = tf_run_track(cfg.get(), paths.input.c_str(), paths.output.c_str(), &summary);
    if (s == TF_OK) print_summary("track", summary, "tracked trunks");
  } else if (sub == eval_det) {
    s = tf_run_eval_det(cfg.get(), paths.input.c_str(), paths.second.c_str(),
                        paths.output.c_str());
  } else if (sub == eval_mot) {
    s = tf_run_eval_mot(cfg.get(), paths.input.c_str(), paths.second.c_str(),
                        paths.output.c_str());
  } else if (sub == annotate) {
    s = tf_run_annotate(cfg.get(), paths.input.c_str(), paths.output.c_str(),
                        nullable(paths.targets), &summary);
    if (s == TF_OK) print_summary("annotate", summary, "instances");
  } else if (sub == simulate) {
    s = tf_run_simulate(cfg.get(), paths.output.c_str(), nullable(paths.detections),
                        nullable(paths.annotations), &summary);
    if (s == TF_OK) print_summary("simulate", summary, "instances");
  }
  if (!report(s, name.c_str())) return kExitError;
  return kExitOk;
}
