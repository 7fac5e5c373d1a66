// Copyright 2026 The trunkfuse Authors
// SPDX-License-Identifier: Apache-2.0

#include "trunkfuse/fusion.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "support/sim_oracle.hpp"
#include "trunkfuse/error.hpp"
#include "trunkfuse/metrics.hpp"
#include "trunkfuse/simulate.hpp"

namespace trunkfuse {
namespace {

ComponentInstance comp(ComponentClass cls, OrientedBox b, double conf = 0.9) {
  return {cls, canonicalize_obb(b), std::nullopt, conf, std::nullopt, std::nullopt};
}

Detection ood_det(ComponentClass cls, OrientedBox b, double conf = 0.9) {
  Detection d;
  d.cls = cls;
  d.confidence = conf;
  d.obb = canonicalize_obb(b);
  d.source = TaskSource::kOod;
  return d;
}

Detection iseg_det(ComponentClass cls, const OrientedBox& b, double conf = 0.9) {
  Detection d;
  d.cls = cls;
  d.confidence = conf;
  const auto c = b.corners();
  d.contour = Contour(std::vector<Point>(c.begin(), c.end()));
  d.source = TaskSource::kIseg;
  return d;
}

PerturbedDetections scene_detections(std::uint64_t seed, Intensity quantity,
                                     const NoiseModel& noise = {}) {
  SceneSpec spec;
  spec.seed = seed;
  spec.scene.quantity = quantity;
  spec.scene.irregularity = Intensity::kLow;
  spec.allow_truncation = false;
  return perturb_detections(gen_scene(spec), noise, seed);
}

TEST(MatchTasks, IdenticalBoxAndContourPair) {
  const OrientedBox b{50, 40, 30, 8, 0.4};
  const std::vector<Detection> ood{ood_det(ComponentClass::kSide, b, 0.7)};
  const std::vector<Detection> iseg{iseg_det(ComponentClass::kSide, b, 0.8)};
  const TaskMatchResult r = match_tasks(ood, iseg, ComponentClass::kSide, {});
  ASSERT_EQ(r.matched.size(), 1u);
  EXPECT_TRUE(r.unmatched_ood.empty());
  EXPECT_TRUE(r.unmatched_iseg.empty());
  EXPECT_EQ(r.matched[0].obb, ood[0].obb);
  EXPECT_EQ(r.matched[0].contour, iseg[0].contour);
  EXPECT_DOUBLE_EQ(r.matched[0].confidence, 0.8);
}

TEST(MatchTasks, DisjointStayUnmatched) {
  const std::vector<Detection> ood{ood_det(ComponentClass::kCut, {10, 10, 5, 5, 0})};
  const std::vector<Detection> iseg{iseg_det(ComponentClass::kCut, {100, 100, 5, 5, 0})};
  const TaskMatchResult r = match_tasks(ood, iseg, ComponentClass::kCut, {});
  EXPECT_TRUE(r.matched.empty());
  EXPECT_EQ(r.unmatched_ood, std::vector<std::size_t>{0});
  EXPECT_EQ(r.unmatched_iseg, std::vector<std::size_t>{0});
}

TEST(MatchTasks, OtherClassesIgnored) {
  const OrientedBox b{50, 40, 30, 8, 0.4};
  const std::vector<Detection> ood{ood_det(ComponentClass::kSide, b)};
  const std::vector<Detection> iseg{iseg_det(ComponentClass::kCut, b)};
  const TaskMatchResult r = match_tasks(ood, iseg, ComponentClass::kSide, {});
  EXPECT_TRUE(r.matched.empty());
  EXPECT_EQ(r.unmatched_ood.size(), 1u);
  EXPECT_TRUE(r.unmatched_iseg.empty());
}

TEST(MatchTasks, RecoversSimulatorPairingUnderJitter) {
  NoiseModel noise;
  noise.position_jitter_px = 2.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const PerturbedDetections d = scene_detections(seed, Intensity::kLow, noise);
    for (ComponentClass cls : kComponentClasses) {
      std::vector<Detection> ood, iseg;
      std::map<std::size_t, std::size_t> local_ood, local_iseg;
      std::map<std::size_t, std::int64_t> ood_trunk, iseg_trunk;
      for (const Correspondence& c : d.correspondences) {
        if (c.cls != cls || !c.ood_index || !c.iseg_index) continue;
        // Thin components can be pushed apart entirely by the jitter.
        const OrientedBox a = *d.ood[*c.ood_index].obb;
        const OrientedBox b = min_area_obb(d.iseg[*c.iseg_index].contour->vertices());
        if (obb_iou(a, b) < 0.3) continue;
        ood_trunk[ood.size()] = c.trunk_id;
        ood.push_back(d.ood[*c.ood_index]);
        iseg_trunk[iseg.size()] = c.trunk_id;
        iseg.push_back(d.iseg[*c.iseg_index]);
        if (ood.size() == 3) break;
      }
      // Reverse one side so the pairing is not the identity.
      std::reverse(iseg.begin(), iseg.end());
      std::map<std::size_t, std::int64_t> rev;
      for (auto& [i, t] : iseg_trunk) rev[iseg.size() - 1 - i] = t;
      const TaskMatchResult r = match_tasks(ood, iseg, cls, {});
      ASSERT_EQ(r.matched.size(), ood.size()) << "seed " << seed;
      for (const ComponentInstance& m : r.matched) {
        EXPECT_EQ(ood_trunk[*m.ood_index], rev[*m.iseg_index]) << "seed " << seed;
      }
    }
  }
}

TEST(CutSideAffinity, Examples) {
  const ComponentInstance side = comp(ComponentClass::kSide, {0, 0, 10, 2, 0});
  EXPECT_DOUBLE_EQ(cut_side_affinity(comp(ComponentClass::kCut, {5, 0, 3, 3, 0}), side), 1.0);
  EXPECT_DOUBLE_EQ(cut_side_affinity(comp(ComponentClass::kCut, {50, 50, 3, 3, 0}), side), 0.0);
  // Box over x in [0, 10], y in [0.5, 1.5]: half of the top edge, a quarter
  // of the right edge.
  EXPECT_NEAR(cut_side_affinity(comp(ComponentClass::kCut, {5, 1, 10, 1, 0}), side), 0.5,
              1e-12);
}

TEST(BoundSideAffinity, UsesBoundEdges) {
  const ComponentInstance side = comp(ComponentClass::kSide, {0, 0, 10, 2, 0});
  // A thin bound across the left end lies fully inside the side box.
  EXPECT_DOUBLE_EQ(bound_side_affinity(comp(ComponentClass::kBound, {-4.5, 0, 1.8, 0.6, kPi / 2}),
                                       side),
                   1.0);
  EXPECT_DOUBLE_EQ(bound_side_affinity(comp(ComponentClass::kBound, {40, 0, 2, 1, 0}), side), 0.0);
}

TEST(MatchComponents, CoaxialCutJoinsSide) {
  const std::vector<ComponentInstance> sides{comp(ComponentClass::kSide, {0, 0, 10, 2, 0})};
  const std::vector<ComponentInstance> cuts{comp(ComponentClass::kCut, {5, 0, 2.2, 2.2, 0})};
  const auto groups = match_components(cuts, sides, {}, {});
  ASSERT_EQ(groups.size(), 1u);
  EXPECT_TRUE(groups[0].side && groups[0].cut);
}

TEST(MatchComponents, ZeroAffinityCutStaysAlone) {
  const std::vector<ComponentInstance> sides{comp(ComponentClass::kSide, {0, 0, 10, 2, 0})};
  const std::vector<ComponentInstance> cuts{comp(ComponentClass::kCut, {40, 40, 2, 2, 0})};
  const auto groups = match_components(cuts, sides, {}, {});
  ASSERT_EQ(groups.size(), 2u);
  for (const auto& g : groups) EXPECT_NE(g.side.has_value(), g.cut.has_value());
}

TEST(MatchComponents, ParallelLogsDoNotCrossPair) {
  const std::vector<ComponentInstance> sides{comp(ComponentClass::kSide, {0, 0, 40, 8, 0}),
                                             comp(ComponentClass::kSide, {0, 10, 40, 8, 0})};
  const std::vector<ComponentInstance> cuts{comp(ComponentClass::kCut, {20, 10, 4, 8.4, 0}),
                                            comp(ComponentClass::kCut, {20, 0, 4, 8.4, 0})};
  const std::vector<ComponentInstance> bounds{comp(ComponentClass::kBound, {-20, 0, 2, 8, 0}),
                                              comp(ComponentClass::kBound, {-20, 10, 2, 8, 0})};
  const auto groups = match_components(cuts, sides, bounds, {});
  ASSERT_EQ(groups.size(), 2u);
  for (const auto& g : groups) {
    ASSERT_TRUE(g.side && g.cut && g.bound);
    EXPECT_DOUBLE_EQ(g.side->obb.cy, g.cut->obb.cy);
    EXPECT_DOUBLE_EQ(g.side->obb.cy, g.bound->obb.cy);
  }
}

TEST(MatchComponents, OneToOne) {
  std::mt19937_64 gen(67);
  std::uniform_real_distribution<double> u(0, 60);
  for (int i = 0; i < 100; ++i) {
    std::vector<ComponentInstance> sides, cuts;
    for (int k = 0; k < 4; ++k) {
      sides.push_back(comp(ComponentClass::kSide, {u(gen), u(gen), 20, 5, u(gen)}));
      cuts.push_back(comp(ComponentClass::kCut, {u(gen), u(gen), 5, 5, 0}));
    }
    const auto groups = match_components(cuts, sides, {}, {});
    std::size_t n_sides = 0, n_cuts = 0;
    for (const auto& g : groups) {
      n_sides += g.side.has_value();
      n_cuts += g.cut.has_value();
    }
    EXPECT_EQ(n_sides, sides.size());
    EXPECT_EQ(n_cuts, cuts.size());
  }
}

TEST(DeriveAxis, Examples) {
  ComponentGroup side_only;
  side_only.side = comp(ComponentClass::kSide, {0, 0, 10, 2, 0});
  const Axis a = derive_axis(side_only);
  EXPECT_NEAR(a.endpoints[0].x, -5, 1e-12);
  EXPECT_NEAR(a.endpoints[0].y, 0, 1e-12);
  EXPECT_NEAR(a.endpoints[1].x, 5, 1e-12);
  EXPECT_NEAR(a.endpoints[1].y, 0, 1e-12);
  EXPECT_FALSE(a.cut_center.has_value());

  ComponentGroup with_cut = side_only;
  with_cut.cut = comp(ComponentClass::kCut, {5.2, 0.1, 2, 2, 0});
  const Axis b = derive_axis(with_cut);
  EXPECT_NEAR(b.endpoints[0].x, -5, 1e-12);
  EXPECT_EQ(b.endpoints[1], (Point{5.2, 0.1}));
  ASSERT_TRUE(b.cut_center.has_value());
  EXPECT_EQ(*b.cut_center, (Point{5.2, 0.1}));

  ComponentGroup cut_only;
  cut_only.cut = comp(ComponentClass::kCut, {3, 3, 2, 2, 0});
  const Axis c = derive_axis(cut_only);
  EXPECT_NEAR(c.endpoints[0].x, 2, 1e-12);
  EXPECT_NEAR(c.endpoints[0].y, 3, 1e-12);
  EXPECT_NEAR(c.endpoints[1].x, 4, 1e-12);
  EXPECT_NEAR(c.endpoints[1].y, 3, 1e-12);

  ComponentGroup bound_end = side_only;
  bound_end.bound = comp(ComponentClass::kBound, {-5.5, 0.2, 1, 2, 0});
  const Axis d = derive_axis(bound_end);
  EXPECT_EQ(d.endpoints[0], (Point{-5.5, 0.2}));
  EXPECT_NEAR(d.endpoints[1].x, 5, 1e-12);

  try {
    derive_axis(ComponentGroup{});
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyGroup);
  }
}

TEST(DeriveAxis, CutCenterFromEllipseFit) {
  ComponentGroup g;
  g.side = comp(ComponentClass::kSide, {0, 0, 40, 10, 0});
  ComponentInstance cut = comp(ComponentClass::kCut, {21, 0.5, 12, 10, 0});
  cut.contour = Contour(ellipse_polygon({20.0, 0.25, 5.0, 4.0, 0.0}, 40));
  g.cut = cut;
  const Axis a = derive_axis(g);
  EXPECT_NEAR(a.endpoints[1].x, 20.0, 1e-6);
  EXPECT_NEAR(a.endpoints[1].y, 0.25, 1e-6);
}

TEST(FuseFrame, EmptyInEmptyOut) {
  EXPECT_TRUE(fuse_frame(std::vector<Detection>{}, std::vector<Detection>{}, {}).empty());
}

TEST(FuseFrame, UnmatchedPolicy) {
  const std::vector<Detection> ood{ood_det(ComponentClass::kCut, {10, 10, 4, 4, 0})};
  const auto keep = fuse_frame(ood, std::vector<Detection>{}, {});
  ASSERT_EQ(keep.size(), 1u);
  EXPECT_TRUE(keep[0].cut.has_value());
  EXPECT_EQ(keep[0].component_count(), 1u);

  FusionConfig strict;
  strict.unmatched_policy = UnmatchedPolicy::kRequireBoth;
  EXPECT_TRUE(fuse_frame(ood, std::vector<Detection>{}, strict).empty());
}

TEST(FuseFrame, ConfidenceFilter) {
  const std::vector<Detection> ood{ood_det(ComponentClass::kSide, {10, 10, 20, 4, 0}, 0.39),
                                   ood_det(ComponentClass::kSide, {60, 10, 20, 4, 0}, 0.4)};
  const auto out = fuse_frame(ood, std::vector<Detection>{}, {});
  ASSERT_EQ(out.size(), 1u);
  EXPECT_DOUBLE_EQ(out[0].side->obb.cx, 60);
}

TEST(FuseFrame, NoiseFreeSimulatorScenesReproduceGrouping) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    for (Intensity q : kIntensities) {
      const PerturbedDetections d = scene_detections(seed, q);
      const auto fused = fuse_frame(d.ood, d.iseg, {});
      const auto s = testing::score_grouping(d, fused);
      EXPECT_EQ(s.correct, s.expected) << "seed " << seed;
      EXPECT_EQ(s.fused, s.expected) << "seed " << seed;
    }
  }
}

TEST(FuseFrame, InvariantsOnNoisyScenes) {
  NoiseModel noise;
  noise.position_jitter_px = 3;
  noise.size_jitter_frac = 0.05;
  noise.angle_jitter_rad = 0.05;
  noise.dropout_prob = 0.2;
  noise.clutter_rate = 3;
  for (std::uint64_t seed = 0; seed < 15; ++seed) {
    SceneSpec spec;
    spec.seed = seed;
    spec.scene.quantity = kIntensities[seed % 3];
    spec.scene.irregularity = kIntensities[(seed / 3) % 3];
    const PerturbedDetections d = perturb_detections(gen_scene(spec), noise, seed);
    const auto fused = fuse_frame(d.ood, d.iseg, {});
    std::map<std::size_t, int> ood_seen, iseg_seen;
    for (const UnifiedTrunk& t : fused) {
      ASSERT_GE(t.component_count(), 1u);
      for (ComponentClass cls : kComponentClasses) {
        const auto& c = t.component(cls);
        if (!c) continue;
        EXPECT_EQ(c->cls, cls);
        for (Point p : c->obb.corners()) EXPECT_TRUE(obb_contains(t.envelope, p, 1e-6));
        if (c->ood_index) ++ood_seen[*c->ood_index];
        if (c->iseg_index) ++iseg_seen[*c->iseg_index];
      }
      for (Point p : t.endpoints) EXPECT_TRUE(obb_contains(inflate(t.envelope, 1.0), p));
    }
    // Every detection above the threshold appears exactly once.
    for (std::size_t i = 0; i < d.ood.size(); ++i) {
      EXPECT_EQ(ood_seen[i], d.ood[i].confidence >= 0.4 ? 1 : 0);
    }
    for (std::size_t i = 0; i < d.iseg.size(); ++i) {
      EXPECT_EQ(iseg_seen[i], d.iseg[i].confidence >= 0.4 ? 1 : 0);
    }
  }
}

TEST(FuseFrame, PermutationInvariant) {
  NoiseModel noise;
  noise.position_jitter_px = 2;
  noise.clutter_rate = 2;
  std::mt19937_64 gen(71);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    PerturbedDetections d = scene_detections(seed, Intensity::kMid, noise);
    const auto a = fuse_frame(d.ood, d.iseg, {});
    std::shuffle(d.ood.begin(), d.ood.end(), gen);
    std::shuffle(d.iseg.begin(), d.iseg.end(), gen);
    const auto b = fuse_frame(d.ood, d.iseg, {});
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_EQ(a[i].envelope, b[i].envelope);
      EXPECT_EQ(a[i].endpoints, b[i].endpoints);
      EXPECT_EQ(a[i].component_count(), b[i].component_count());
    }
  }
}

TEST(FuseFrame, Deterministic) {
  const PerturbedDetections d = scene_detections(5, Intensity::kHigh);
  const auto a = fuse_frame(d.ood, d.iseg, {});
  const auto b = fuse_frame(d.ood, d.iseg, {});
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].envelope, b[i].envelope);
}

TEST(FusionConfig, RejectsOutOfRangeThresholds) {
  FusionConfig c;
  c.confidence_threshold = 1.5;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.component_match_min_affinity = -0.1;
  EXPECT_THROW(c.validate(), Error);
}

}  // namespace
}  // namespace trunkfuse
