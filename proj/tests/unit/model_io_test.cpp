// Copyright 2026 The trunkfuse Authors
// SPDX-License-Identifier: Apache-2.0

#include "trunkfuse/model_io.hpp"

#include <gtest/gtest.h>

#include <random>

#include "support/temp_dir.hpp"
#include "trunkfuse/error.hpp"
#include "trunkfuse/report.hpp"

namespace trunkfuse {
namespace {

using testing::TempDir;

ErrorCode code_of(const auto& fn, std::string* message = nullptr) {
  try {
    fn();
  } catch (const Error& e) {
    if (message) *message = e.what();
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::kInvalidConfig;
}

Contour random_contour(std::mt19937_64& gen) {
  std::uniform_real_distribution<double> c(0.0, 500.0);
  std::uniform_real_distribution<double> r(5.0, 40.0);
  const double cx = c(gen);
  const double cy = c(gen);
  std::vector<Point> pts;
  const int n = 3 + static_cast<int>(gen() % 10);
  for (int k = 0; k < n; ++k) {
    const double t = 2 * kPi * k / n;
    const double rad = r(gen);
    pts.push_back({cx + rad * std::cos(t), cy + rad * std::sin(t)});
  }
  return Contour(pts);
}

DetectionFrame random_detection_frame(std::mt19937_64& gen, std::int64_t id) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  DetectionFrame f{id, 0.1 * static_cast<double>(id) + u(gen) * 0.01, {}};
  for (int i = 0; i < 6; ++i) {
    Detection d;
    d.cls = kComponentClasses[gen() % 3];
    d.confidence = u(gen);
    if (i % 2 == 0) {
      d.source = TaskSource::kOod;
      d.obb = canonicalize_obb({u(gen) * 600, u(gen) * 400, 5 + u(gen) * 50, 5 + u(gen) * 50,
                                u(gen) * kPi});
    } else {
      d.source = TaskSource::kIseg;
      d.contour = random_contour(gen);
    }
    f.detections.push_back(std::move(d));
  }
  return f;
}

GroundTruthFrame random_gt_frame(std::mt19937_64& gen, std::int64_t id) {
  GroundTruthFrame f;
  f.frame_id = id;
  f.timestamp_s = static_cast<double>(id) / 30.0;
  f.scene = SceneParameters{kIntensities[gen() % 3], Intensity::kLow, kIntensities[gen() % 3],
                            kIntensities[gen() % 3], gen() % 2 == 0};
  if (gen() % 2) f.image_size = ImageSize{640, 480};
  for (std::int64_t t = 0; t < 4; ++t) {
    GroundTruthInstance inst;
    inst.trunk_id = t;
    inst.components.emplace(ComponentClass::kSide, random_contour(gen));
    if (t % 2) inst.components.emplace(ComponentClass::kCut, random_contour(gen));
    f.instances.push_back(std::move(inst));
  }
  return f;
}

void expect_same(const Detection& a, const Detection& b) {
  EXPECT_EQ(a.cls, b.cls);
  EXPECT_EQ(a.source, b.source);
  EXPECT_EQ(a.confidence, b.confidence);
  EXPECT_EQ(a.obb, b.obb);
  EXPECT_EQ(a.contour, b.contour);
}

constexpr const char* kTwoFrames =
    R"({"format_version":1,"frame_id":0,"timestamp_s":0.0,"detections":[{"class":"side","confidence":0.9,"obb":[10,10,20,5,0.1],"source":"ood"}]}
{"format_version":1,"frame_id":1,"timestamp_s":0.1,"detections":[{"class":"cut","confidence":0.5,"contour":[[0,0],[4,0],[4,4],[0,4]],"source":"iseg"}]}
)";

TEST(LoadDetections, ValidTwoFrameFile) {
  TempDir dir("io_valid");
  const auto frames = load_detections(dir.write("d.jsonl", kTwoFrames));
  ASSERT_EQ(frames.size(), 2u);
  EXPECT_EQ(frames[0].detections[0].cls, ComponentClass::kSide);
  EXPECT_TRUE(frames[0].detections[0].obb.has_value());
  EXPECT_EQ(frames[1].detections[0].source, TaskSource::kIseg);
  EXPECT_DOUBLE_EQ(frames[1].detections[0].contour->area(), 16.0);
}

TEST(LoadDetections, ConfidenceOutOfRangeNamesField) {
  TempDir dir("io_conf");
  const auto p = dir.write("d.jsonl",
                           R"({"format_version":1,"frame_id":0,"timestamp_s":0,"detections":[{"class":"side","confidence":1.7,"obb":[1,1,2,1,0],"source":"ood"}]})"
                           "\n");
  std::string msg;
  EXPECT_EQ(code_of([&] { load_detections(p); }, &msg), ErrorCode::kSchemaError);
  EXPECT_NE(msg.find("confidence"), std::string::npos) << msg;
  EXPECT_NE(msg.find("line 1"), std::string::npos) << msg;
}

TEST(LoadDetections, RejectsSchemaViolations) {
  TempDir dir("io_schema");
  const std::vector<std::string> bad = {
      R"({"format_version":1,"frame_id":0,"timestamp_s":0,"detections":[{"class":"branch","confidence":0.5,"obb":[1,1,2,1,0],"source":"ood"}]})",
      R"({"format_version":1,"frame_id":0,"timestamp_s":0,"detections":[{"class":"side","confidence":0.5,"source":"ood"}]})",
      R"({"format_version":1,"frame_id":0,"timestamp_s":0,"detections":[{"class":"side","confidence":0.5,"obb":[1,1,2,1,0],"source":"iseg"}]})",
      R"({"format_version":2,"frame_id":0,"timestamp_s":0,"detections":[]})",
  };
  for (const std::string& line : bad) {
    const auto p = dir.write("bad.jsonl", line + "\n");
    EXPECT_EQ(code_of([&] { load_detections(p); }), ErrorCode::kSchemaError) << line;
  }
  const auto garbled = dir.write("garbled.jsonl", "{\"frame_id\": 0,\n");
  EXPECT_EQ(code_of([&] { load_detections(garbled); }), ErrorCode::kParseError);
  EXPECT_EQ(code_of([&] { load_detections(dir / "missing.jsonl"); }), ErrorCode::kIoError);
}

TEST(LoadDetections, RoundTrip) {
  std::mt19937_64 gen(53);
  TempDir dir("io_rt_det");
  std::vector<DetectionFrame> frames;
  for (int i = 0; i < 20; ++i) frames.push_back(random_detection_frame(gen, i));
  save_detections(dir / "d.jsonl", frames);
  const auto back = load_detections(dir / "d.jsonl");
  ASSERT_EQ(back.size(), frames.size());
  for (std::size_t f = 0; f < frames.size(); ++f) {
    EXPECT_EQ(back[f].frame_id, frames[f].frame_id);
    EXPECT_EQ(back[f].timestamp_s, frames[f].timestamp_s);
    ASSERT_EQ(back[f].detections.size(), frames[f].detections.size());
    for (std::size_t d = 0; d < frames[f].detections.size(); ++d) {
      expect_same(back[f].detections[d], frames[f].detections[d]);
    }
  }
}

TEST(LoadGroundTruth, LiveTreeAcceptedDuplicateRejected) {
  TempDir dir("io_gt");
  const std::string scene =
      R"("scene":{"entropy":"low","quantity":"low","distance":"low","irregularity":"low","snow":false})";
  const auto ok = dir.write(
      "ok.jsonl", R"({"format_version":1,"frame_id":0,"timestamp_s":0,)" + scene +
                      R"(,"instances":[{"trunk_id":0,"components":{"side":[[0,0],[9,0],[9,3],[0,3]]}}]})"
                      "\n");
  const auto gts = load_ground_truth(ok);
  ASSERT_EQ(gts.size(), 1u);
  EXPECT_EQ(gts[0].instances[0].trunk_id, 0);

  const auto dup = dir.write(
      "dup.jsonl",
      R"({"format_version":1,"frame_id":0,"timestamp_s":0,)" + scene +
          R"(,"instances":[{"trunk_id":3,"components":{"cut":[[0,0],[2,0],[2,2],[0,2]]}},)"
          R"({"trunk_id":3,"components":{"cut":[[5,5],[7,5],[7,7],[5,7]]}}]})"
          "\n");
  EXPECT_EQ(code_of([&] { load_ground_truth(dup); }), ErrorCode::kSchemaError);
}

TEST(LoadGroundTruth, QuantityLabelMustMatchCount) {
  TempDir dir("io_qty");
  const auto p = dir.write(
      "q.jsonl",
      R"({"format_version":1,"frame_id":0,"timestamp_s":0,"scene":{"entropy":"low","quantity":"high","distance":"low","irregularity":"low","snow":false},"instances":[{"trunk_id":1,"components":{"side":[[0,0],[9,0],[9,3],[0,3]]}}]})"
      "\n");
  EXPECT_EQ(code_of([&] { load_ground_truth(p); }), ErrorCode::kSchemaError);
  EXPECT_EQ(load_ground_truth(p, {.check_scene_quantity = false}).size(), 1u);
}

TEST(LoadGroundTruth, RoundTrip) {
  std::mt19937_64 gen(59);
  TempDir dir("io_rt_gt");
  std::vector<GroundTruthFrame> frames;
  for (int i = 0; i < 15; ++i) frames.push_back(random_gt_frame(gen, i));
  save_ground_truth(dir / "g.jsonl", frames);
  const auto back = load_ground_truth(dir / "g.jsonl");
  ASSERT_EQ(back.size(), frames.size());
  for (std::size_t f = 0; f < frames.size(); ++f) {
    EXPECT_EQ(back[f].frame_id, frames[f].frame_id);
    EXPECT_EQ(back[f].timestamp_s, frames[f].timestamp_s);
    EXPECT_EQ(back[f].scene, frames[f].scene);
    EXPECT_EQ(back[f].image_size, frames[f].image_size);
    ASSERT_EQ(back[f].instances.size(), frames[f].instances.size());
    for (std::size_t i = 0; i < frames[f].instances.size(); ++i) {
      EXPECT_EQ(back[f].instances[i].trunk_id, frames[f].instances[i].trunk_id);
      EXPECT_EQ(back[f].instances[i].components, frames[f].instances[i].components);
    }
  }
}

TEST(LoadGroundTruth, RejectsRepeatedTimestamps) {
  std::mt19937_64 gen(61);
  TempDir dir("io_ts");
  std::vector<GroundTruthFrame> frames{random_gt_frame(gen, 0), random_gt_frame(gen, 1)};
  frames[1].timestamp_s = frames[0].timestamp_s;
  save_ground_truth(dir / "g.jsonl", frames);
  EXPECT_EQ(code_of([&] { load_ground_truth(dir / "g.jsonl"); }), ErrorCode::kSchemaError);
}

TEST(FusedAndTracks, RoundTrip) {
  TempDir dir("io_rt_fused");
  UnifiedTrunk t;
  t.side = ComponentInstance{ComponentClass::kSide, {50, 20, 40, 10, 0.2}, std::nullopt, 0.8,
                             std::nullopt, std::nullopt};
  t.cut = ComponentInstance{ComponentClass::kCut, {70, 24, 10, 9, 1.7},
                            Contour(std::vector<Point>{{66, 20}, {75, 20}, {75, 29}, {66, 29}}),
                            0.6, std::nullopt, std::nullopt};
  t.envelope = {52, 22, 45, 12, 0.2};
  t.endpoints = {Point{30, 16}, Point{70.5, 24.5}};
  t.cut_center = Point{70.5, 24.5};
  t.confidence = 0.8;
  const std::vector<FusedFrame> fused{{3, 0.25, {t}}};
  save_fused(dir / "f.jsonl", fused);
  const auto f = load_fused(dir / "f.jsonl");
  ASSERT_EQ(f.size(), 1u);
  const UnifiedTrunk& b = f[0].trunks[0];
  EXPECT_EQ(b.side->obb, t.side->obb);
  EXPECT_EQ(b.cut->contour, t.cut->contour);
  EXPECT_FALSE(b.bound.has_value());
  EXPECT_EQ(b.envelope, t.envelope);
  EXPECT_EQ(b.endpoints, t.endpoints);
  EXPECT_EQ(b.cut_center, t.cut_center);
  EXPECT_EQ(b.confidence, t.confidence);

  const std::vector<TrackedFrame> tracks{{3, 0.25, {{7, t, 0}}}};
  save_tracks(dir / "t.jsonl", tracks);
  const auto tb = load_tracks(dir / "t.jsonl");
  ASSERT_EQ(tb.size(), 1u);
  EXPECT_EQ(tb[0].tracks[0].track_id, 7);
  EXPECT_EQ(tb[0].tracks[0].trunk.envelope, t.envelope);
}

TEST(Annotations, RoundTrip) {
  TempDir dir("io_rt_ann");
  AnnotationFrame a;
  a.frame_id = 2;
  a.timestamp_s = 1.5;
  a.primitives.push_back({PrimitiveKind::kEdge, {{0, 0}, {10, 0}, {20, 1}}, 4});
  a.primitives.push_back({PrimitiveKind::kAreaMarker, {{5, 2}}, 4});
  save_annotations(dir / "a.jsonl", std::vector{a});
  const auto b = load_annotations(dir / "a.jsonl");
  ASSERT_EQ(b.size(), 1u);
  ASSERT_EQ(b[0].primitives.size(), 2u);
  EXPECT_EQ(b[0].primitives[0].points, a.primitives[0].points);
  EXPECT_EQ(b[0].primitives[1].kind, PrimitiveKind::kAreaMarker);
  EXPECT_EQ(b[0].primitives[1].trunk_id, 4);
}

TEST(Sha256, KnownDigest) {
  TempDir dir("io_sha");
  EXPECT_EQ(file_sha256(dir.write("abc.txt", "abc")),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Report, EmptyRoundTripAndDeterminism) {
  TempDir dir("io_report");
  Report empty;
  empty.kind = "eval-mot";
  write_report(empty, dir / "empty.json");
  EXPECT_EQ(load_report(dir / "empty.json"), empty);

  Report r;
  r.kind = "eval-det";
  r.config = {{"seed", "3"}, {"iou-thresh", "0.5"}};
  r.inputs = {{"a.jsonl", std::string(64, '0')}};
  r.add_metric("fused.precision", 0.1 + 0.2);
  r.add_metric("fused.recall", 0.0, true);
  r.tables.push_back({"t", {"name", "n", "v"}, {{std::string("x"), std::int64_t{3}, 1.0 / 3.0}}});
  r.notes.push_back("note");
  write_report(r, dir / "a.json");
  write_report(r, dir / "b.json");
  EXPECT_EQ(testing::read_file(dir / "a.json"), testing::read_file(dir / "b.json"));
  EXPECT_EQ(testing::read_file(dir / "a.txt"), testing::read_file(dir / "b.txt"));
  EXPECT_EQ(load_report(dir / "a.json"), r);
  EXPECT_FALSE(testing::read_file(dir / "a.txt").empty());
}

TEST(Report, UnwritablePathIsIoError) {
  EXPECT_EQ(code_of([] { write_report(Report{}, "/nonexistent-dir/x/report.json"); }),
            ErrorCode::kIoError);
}

}  // namespace
}  // namespace trunkfuse
