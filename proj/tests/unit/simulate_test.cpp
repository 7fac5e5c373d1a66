// Copyright 2026 The trunkfuse Authors
// SPDX-License-Identifier: Apache-2.0

#include "trunkfuse/simulate.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "trunkfuse/error.hpp"
#include "trunkfuse/model_io.hpp"
#include "trunkfuse/rng.hpp"

namespace trunkfuse {
namespace {

SceneSpec spec_for(std::uint64_t seed, Intensity quantity = Intensity::kLow) {
  SceneSpec s;
  s.seed = seed;
  s.scene.quantity = quantity;
  return s;
}

// Orientation of the straight line from bound end to cut end, mod pi.
double orientation(const SimTrunk& t) {
  const Point d = t.spine.back() - t.spine.front();
  return wrap_angle_pi(std::atan2(d.y, d.x));
}

double angular_gap(double a, double b) {
  const double d = std::abs(a - b);
  return std::min(d, kPi - d);
}

double max_pairwise_gap(const std::vector<SimTrunk>& trunks) {
  double worst = 0.0;
  for (std::size_t i = 0; i < trunks.size(); ++i) {
    for (std::size_t j = i + 1; j < trunks.size(); ++j) {
      worst = std::max(worst, angular_gap(orientation(trunks[i]), orientation(trunks[j])));
    }
  }
  return worst;
}

double total_turning(const SimTrunk& t) {
  double sum = 0.0;
  for (std::size_t i = 1; i + 1 < t.spine.size(); ++i) {
    const Point a = t.spine[i] - t.spine[i - 1];
    const Point b = t.spine[i + 1] - t.spine[i];
    sum += std::abs(std::atan2(cross(a, b), dot(a, b)));
  }
  return sum;
}

TEST(Rng, StreamsAreReproducibleAndIndependent) {
  Rng a(1, {2, 3});
  Rng b(1, {2, 3});
  Rng c(1, {2, 4});
  int same = 0;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next();
    EXPECT_EQ(x, b.next());
    same += x == c.next();
  }
  EXPECT_EQ(same, 0);
}

TEST(Rng, DistributionMoments) {
  Rng r(9, {1});
  double su = 0, sn = 0, sn2 = 0, sp = 0, sp_big = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    su += u;
    const double z = r.normal();
    sn += z;
    sn2 += z * z;
    sp += static_cast<double>(r.poisson(3.0));
    sp_big += static_cast<double>(r.poisson(50.0));
  }
  EXPECT_NEAR(su / n, 0.5, 0.01);
  EXPECT_NEAR(sn / n, 0.0, 0.02);
  EXPECT_NEAR(sn2 / n, 1.0, 0.02);
  EXPECT_NEAR(sp / n, 3.0, 0.05);
  EXPECT_NEAR(sp_big / n, 50.0, 0.2);
  for (int i = 0; i < 1000; ++i) {
    const auto k = r.uniform_int(-2, 2);
    EXPECT_GE(k, -2);
    EXPECT_LE(k, 2);
  }
}

TEST(GenScene, QuantityLevels) {
  EXPECT_GE(gen_scene(spec_for(7, Intensity::kMid)).instances.size(), kMidQuantityMin);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto low = gen_scene(spec_for(seed, Intensity::kLow)).instances.size();
    const auto mid = gen_scene(spec_for(seed, Intensity::kMid)).instances.size();
    const auto high = gen_scene(spec_for(seed, Intensity::kHigh)).instances.size();
    EXPECT_GE(low, 1u);
    EXPECT_LT(low, kMidQuantityMin);
    EXPECT_GE(mid, kMidQuantityMin);
    EXPECT_LT(mid, kHighQuantityMin);
    EXPECT_GE(high, kHighQuantityMin);
  }
}

TEST(GenScene, Deterministic) {
  SceneSpec s = spec_for(21, Intensity::kHigh);
  s.scene.irregularity = Intensity::kHigh;
  {
    const GroundTruthFrame a = gen_scene(s);
    const GroundTruthFrame b = gen_scene(s);
    ASSERT_EQ(a.instances.size(), b.instances.size());
    for (std::size_t i = 0; i < a.instances.size(); ++i) {
      EXPECT_EQ(a.instances[i].trunk_id, b.instances[i].trunk_id);
      EXPECT_EQ(a.instances[i].components, b.instances[i].components);
    }
    EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
  }
}

TEST(GenScene, FramesPassValidation) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    SceneSpec s = spec_for(seed, kIntensities[seed % 3]);
    s.scene.entropy = kIntensities[(seed / 3) % 3];
    s.scene.distance = kIntensities[(seed / 9) % 3];
    s.scene.irregularity = kIntensities[(seed / 2) % 3];
    const GroundTruthFrame f = gen_scene(s);
    EXPECT_NO_THROW(validate(f));
    EXPECT_NO_THROW(parse_ground_truth_frame(to_json(f), "seed " + std::to_string(seed)));
    for (const auto& inst : f.instances) {
      for (const auto& [cls, c] : inst.components) {
        for (Point p : c.vertices()) {
          EXPECT_GE(p.x, -1e-6);
          EXPECT_GE(p.y, -1e-6);
          EXPECT_LE(p.x, 1280 + 1e-6);
          EXPECT_LE(p.y, 720 + 1e-6);
        }
      }
    }
  }
}

TEST(GenScene, LowEntropyIsNearParallel) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    SceneSpec s = spec_for(seed, Intensity::kMid);
    s.scene.entropy = Intensity::kLow;
    EXPECT_LT(max_pairwise_gap(gen_scene_model(s).trunks), 15.0 * kPi / 180.0) << seed;
  }
}

TEST(GenScene, KnobsMoveTheirStatistics) {
  double spread[3] = {}, truncated[3] = {}, turning[3] = {}, count[3] = {};
  double trunks_by_distance[3] = {};
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    for (int level = 0; level < 3; ++level) {
      const Intensity lv = kIntensities[level];
      SceneSpec e = spec_for(seed, Intensity::kMid);
      e.scene.entropy = lv;
      spread[level] += max_pairwise_gap(gen_scene_model(e).trunks);

      count[level] += static_cast<double>(gen_scene_model(spec_for(seed, lv)).trunks.size());

      SceneSpec d = spec_for(seed, Intensity::kMid);
      d.scene.distance = lv;
      const SimScene ds = gen_scene_model(d);
      for (bool t : ds.truncated) truncated[level] += t;
      trunks_by_distance[level] += static_cast<double>(ds.trunks.size());

      SceneSpec r = spec_for(seed, Intensity::kLow);
      r.scene.irregularity = lv;
      for (const SimTrunk& t : gen_scene_model(r).trunks) turning[level] += total_turning(t);
    }
  }
  EXPECT_LT(spread[0], spread[1]);
  EXPECT_LT(spread[1], spread[2]);
  EXPECT_LT(count[0], count[1]);
  EXPECT_LT(count[1], count[2]);
  // Near logs are cut by the border more often.
  EXPECT_GT(truncated[0] / trunks_by_distance[0], truncated[1] / trunks_by_distance[1]);
  EXPECT_GT(truncated[1] / trunks_by_distance[1], truncated[2] / trunks_by_distance[2]);
  EXPECT_EQ(turning[0], 0.0);
  EXPECT_LT(turning[0], turning[1]);
  EXPECT_LT(turning[1], turning[2]);
}

TEST(GenScene, InvalidSpecs) {
  SceneSpec s;
  s.image_size = {32, 32};
  EXPECT_THROW(gen_scene(s), Error);
  SceneSpec t;
  t.trunk_count = 12;  // Low quantity allows at most 7
  try {
    gen_scene(t);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidSpec);
  }
}

TEST(TrunkPolygons, PartitionTheTrunk) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SceneSpec s = spec_for(seed, Intensity::kMid);
    s.scene.irregularity = kIntensities[seed % 3];
    for (const SimTrunk& t : gen_scene_model(s).trunks) {
      const auto polys = trunk_polygons(t);
      ASSERT_EQ(polys.size(), 3u);
      const Ring& side = polys.at(ComponentClass::kSide);
      const Ring& cut = polys.at(ComponentClass::kCut);
      const Ring& bound = polys.at(ComponentClass::kBound);
      const double cut_area = signed_area(cut);
      EXPECT_LT(polygon_intersection_area(side, cut), 1e-6 * cut_area);
      EXPECT_LT(polygon_intersection_area(side, bound), 1e-6 * signed_area(bound));
      EXPECT_LT(polygon_intersection_area(cut, bound), 1e-6 * cut_area);
      const Ellipse e = cut_ellipse(t);
      EXPECT_NEAR(e.cx, t.spine.back().x, 1e-9);
      EXPECT_NEAR(e.cy, t.spine.back().y, 1e-9);
    }
  }
}

TEST(Perturb, ZeroNoiseIsIdentity) {
  const GroundTruthFrame gt = gen_scene(spec_for(3, Intensity::kMid));
  const PerturbedDetections d = perturb_detections(gt, {}, 3);
  EXPECT_EQ(d.clutter, 0u);
  std::size_t comps = 0;
  for (const auto& inst : gt.instances) comps += inst.components.size();
  EXPECT_EQ(d.ood.size(), comps);
  EXPECT_EQ(d.iseg.size(), comps);
  for (const Correspondence& c : d.correspondences) {
    const auto& inst = gt.instances[static_cast<std::size_t>(c.trunk_id - 1)];
    ASSERT_EQ(inst.trunk_id, c.trunk_id);
    const Contour& truth = inst.components.at(c.cls);
    ASSERT_TRUE(c.ood_index && c.iseg_index);
    EXPECT_EQ(*d.ood[*c.ood_index].obb, min_area_obb(truth.vertices()));
    EXPECT_EQ(*d.iseg[*c.iseg_index].contour, truth);
    EXPECT_EQ(d.ood[*c.ood_index].cls, c.cls);
    EXPECT_DOUBLE_EQ(d.ood[*c.ood_index].confidence, 0.9);
  }
  const DetectionFrame f = d.to_frame(4, 0.5);
  EXPECT_EQ(f.detections.size(), 2 * comps);
  EXPECT_EQ(f.detections.front().source, TaskSource::kOod);
  EXPECT_EQ(f.detections.back().source, TaskSource::kIseg);
}

TEST(Perturb, FullDropoutIsEmpty) {
  NoiseModel n;
  n.dropout_prob = 1.0;
  const PerturbedDetections d = perturb_detections(gen_scene(spec_for(3, Intensity::kMid)), n, 3);
  EXPECT_TRUE(d.ood.empty());
  EXPECT_TRUE(d.iseg.empty());
}

TEST(Perturb, PositionJitterHasHalfNormalMean) {
  NoiseModel n;
  n.position_jitter_px = 2.0;
  double sum = 0.0;
  std::size_t samples = 0;
  for (std::uint64_t seed = 0; samples < 10000; ++seed) {
    const GroundTruthFrame gt = gen_scene(spec_for(seed, Intensity::kHigh));
    const PerturbedDetections d = perturb_detections(gt, n, seed);
    for (const Correspondence& c : d.correspondences) {
      const auto& inst = gt.instances[static_cast<std::size_t>(c.trunk_id - 1)];
      const OrientedBox truth = min_area_obb(inst.components.at(c.cls).vertices());
      const OrientedBox got = *d.ood[*c.ood_index].obb;
      sum += std::abs(got.cx - truth.cx) + std::abs(got.cy - truth.cy);
      samples += 2;
    }
  }
  EXPECT_NEAR(sum / static_cast<double>(samples), 2.0 * std::sqrt(2.0 / kPi), 0.05);
}

TEST(Perturb, ClutterAndDropoutRates) {
  NoiseModel n;
  n.dropout_prob = 0.2;
  n.clutter_rate = 4.0;
  double kept = 0, total = 0, clutter = 0;
  const int scenes = 200;
  for (int seed = 0; seed < scenes; ++seed) {
    const GroundTruthFrame gt = gen_scene(spec_for(seed, Intensity::kMid));
    const PerturbedDetections d = perturb_detections(gt, n, seed);
    for (const auto& inst : gt.instances) total += static_cast<double>(inst.components.size());
    for (const Correspondence& c : d.correspondences) {
      kept += 1;
      EXPECT_TRUE(c.ood_index.has_value());
      EXPECT_TRUE(c.iseg_index.has_value());
    }
    clutter += static_cast<double>(d.clutter);
    EXPECT_EQ(d.ood.size() + d.iseg.size(), 2 * static_cast<std::size_t>(
                                                     std::count_if(d.correspondences.begin(), d.correspondences.end(),
                                                                   [](const Correspondence& c) { return c.ood_index.has_value(); })) +
                                                 d.clutter);
  }
  const double recall = kept / total;
  const double ci = 3 * std::sqrt(0.8 * 0.2 / total);
  EXPECT_NEAR(recall, 0.8, ci);
  EXPECT_NEAR(clutter / scenes, 4.0, 3 * std::sqrt(4.0 / scenes));
}

TEST(Perturb, Deterministic) {
  NoiseModel n;
  n.position_jitter_px = 1;
  n.clutter_rate = 2;
  n.dropout_prob = 0.1;
  const GroundTruthFrame gt = gen_scene(spec_for(8, Intensity::kMid));
  const auto a = perturb_detections(gt, n, 8).to_frame(0, 0);
  const auto b = perturb_detections(gt, n, 8).to_frame(0, 0);
  EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
}

TEST(NoiseModel, Validation) {
  NoiseModel n;
  n.dropout_prob = 1.5;
  EXPECT_THROW(n.validate(), Error);
  n = {};
  n.position_jitter_px = -1;
  EXPECT_THROW(n.validate(), Error);
}

TEST(GenSequence, ZeroVelocityFramesIdentical) {
  MotionSpec m;
  m.min_speed_px = 0;
  m.max_speed_px = 0;
  const auto seq = gen_sequence(spec_for(5, Intensity::kMid), 10, m);
  ASSERT_EQ(seq.size(), 10u);
  for (std::size_t f = 1; f < seq.size(); ++f) {
    EXPECT_GT(seq[f].timestamp_s, seq[f - 1].timestamp_s);
    ASSERT_EQ(seq[f].instances.size(), seq[0].instances.size());
    for (std::size_t i = 0; i < seq[0].instances.size(); ++i) {
      EXPECT_EQ(seq[f].instances[i].components, seq[0].instances[i].components);
    }
  }
}

TEST(GenSequence, ExitingTrunksNeverReturn) {
  MotionSpec m;
  m.min_speed_px = 6;
  m.max_speed_px = 10;
  bool saw_exit = false;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto seq = gen_sequence(spec_for(seed, Intensity::kMid), 120, m);
    std::set<std::int64_t> gone;
    std::set<std::int64_t> prev;
    for (const auto& f : seq) {
      std::set<std::int64_t> now;
      for (const auto& inst : f.instances) {
        now.insert(inst.trunk_id);
        EXPECT_FALSE(gone.count(inst.trunk_id)) << "id " << inst.trunk_id << " reappeared";
      }
      for (std::int64_t id : prev) {
        if (!now.count(id)) gone.insert(id);
      }
      prev = now;
      EXPECT_NO_THROW(validate(f));
    }
    saw_exit |= !gone.empty();
  }
  EXPECT_TRUE(saw_exit);
}

TEST(GenSequence, Deterministic) {
  MotionSpec m;
  m.accel_sigma_px = 0.2;
  const auto a = gen_sequence(spec_for(2, Intensity::kMid), 15, m);
  const auto b = gen_sequence(spec_for(2, Intensity::kMid), 15, m);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t f = 0; f < a.size(); ++f) EXPECT_EQ(to_json(a[f]).dump(), to_json(b[f]).dump());
}

TEST(GenSequence, Errors) {
  EXPECT_THROW(gen_sequence(spec_for(1), 0, {}), Error);
  MotionSpec m;
  m.min_speed_px = 3;
  m.max_speed_px = 1;
  EXPECT_THROW(gen_sequence(spec_for(1), 5, m), Error);
}

}  // namespace
}  // namespace trunkfuse
