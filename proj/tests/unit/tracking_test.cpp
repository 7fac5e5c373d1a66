// Copyright 2026 The trunkfuse Authors
// SPDX-License-Identifier: Apache-2.0

#include "trunkfuse/tracking.hpp"

#include <gtest/gtest.h>

#include <random>

#include "trunkfuse/error.hpp"

namespace trunkfuse {
namespace {

UnifiedTrunk trunk_at(OrientedBox b, double conf = 0.9) {
  UnifiedTrunk t;
  ComponentInstance side{ComponentClass::kSide, canonicalize_obb(b), std::nullopt, conf,
                         std::nullopt, std::nullopt};
  t.side = side;
  t.envelope = side.obb;
  const auto ends = obb_short_edge_midpoints(side.obb);
  t.endpoints = {ends[0], ends[1]};
  t.confidence = conf;
  return t;
}

double trace(const StateMatrix& m) { return m.trace(); }

bool symmetric_pd(const StateMatrix& m) {
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-9) return false;
  return Eigen::LLT<StateMatrix>(m).info() == Eigen::Success;
}

TEST(Kalman, PredictZeroVelocity) {
  const KalmanState s = kalman_initiate({100, 50, 40, 10, 0.3});
  const KalmanState p = kalman_predict(s, 1.0);
  EXPECT_EQ(p.mean.head<5>(), s.mean.head<5>());
  EXPECT_GT(trace(p.covariance), trace(s.covariance));
}

TEST(Kalman, PredictAdvancesByVelocity) {
  KalmanState s = kalman_initiate({100, 50, 40, 10, 0.3});
  s.mean(5) = 1.0;
  EXPECT_DOUBLE_EQ(kalman_predict(s, 1.0).mean(0), 101.0);
}

TEST(Kalman, ConstantVelocityPredictionIsExact) {
  KalmanState s = kalman_initiate({100, 50, 40, 10, 0.3});
  s.mean(5) = 1.5;
  s.mean(6) = -0.75;
  for (int k = 0; k < 20; ++k) s = kalman_predict(s, 1.0);
  EXPECT_NEAR(s.mean(0), 100 + 20 * 1.5, 1e-9);
  EXPECT_NEAR(s.mean(1), 50 - 20 * 0.75, 1e-9);
}

TEST(Kalman, UpdateAtMeanKeepsMeanShrinksCovariance) {
  const OrientedBox b{100, 50, 40, 10, 0.3};
  const KalmanState p = kalman_predict(kalman_initiate(b), 1.0);
  const KalmanState u = kalman_update(p, b);
  for (int i = 0; i < 10; ++i) EXPECT_NEAR(u.mean(i), p.mean(i), 1e-12);
  EXPECT_LT(trace(u.covariance), trace(p.covariance));
}

TEST(Kalman, ConvergesToFixedMeasurement) {
  const OrientedBox m{120, 40, 44, 12, 0.5};
  KalmanState s = kalman_initiate({100, 50, 40, 10, 0.3});
  for (int k = 0; k < 50; ++k) s = kalman_update(kalman_predict(s, 1.0), m);
  EXPECT_NEAR(s.mean(0), m.cx, 1e-6);
  EXPECT_NEAR(s.mean(1), m.cy, 1e-6);
  EXPECT_NEAR(s.mean(2), m.width, 1e-6);
  EXPECT_NEAR(s.mean(3), m.height, 1e-6);
  EXPECT_NEAR(s.mean(4), m.angle, 1e-6);
}

TEST(Kalman, HalfTurnIsZeroInnovation) {
  const OrientedBox b{100, 50, 40, 10, 0.3};
  const KalmanState p = kalman_predict(kalman_initiate(b), 1.0);
  OrientedBox flipped = b;
  flipped.angle += kPi;
  const KalmanState u = kalman_update(p, flipped);
  for (int i = 0; i < 10; ++i) EXPECT_NEAR(u.mean(i), p.mean(i), 1e-9);
  // The swapped-sides representation is the same box as well.
  const OrientedBox swapped{100, 50, 10, 40, 0.3 + kPi / 2};
  const KalmanState v = kalman_update(p, swapped);
  for (int i = 0; i < 10; ++i) EXPECT_NEAR(v.mean(i), p.mean(i), 1e-9);
}

TEST(Kalman, AngleStaysContinuousAcrossWrap) {
  KalmanState s = kalman_initiate({100, 50, 40, 10, kPi - 0.02});
  for (int k = 1; k <= 10; ++k) {
    s = kalman_update(kalman_predict(s, 1.0), canonicalize_obb({100, 50, 40, 10, kPi - 0.02 + 0.01 * k}));
  }
  EXPECT_GT(s.mean(4), kPi);
}

TEST(Kalman, CovarianceStaysSymmetricPositiveDefinite) {
  std::mt19937_64 gen(73);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  KalmanState s = kalman_initiate({200, 200, 50, 12, 1.0});
  for (int k = 0; k < 10000; ++k) {
    s = kalman_predict(s, 1.0 + (k % 3));
    if (k % 5 != 4) {
      s = kalman_update(s, canonicalize_obb({s.mean(0) + 3 * u(gen), s.mean(1) + 3 * u(gen),
                                             50 + u(gen), 12 + u(gen), 1.0 + 0.05 * u(gen)}));
    }
    ASSERT_TRUE(symmetric_pd(s.covariance)) << "cycle " << k;
  }
}

TEST(Tracker, StationaryTrunkKeepsOneId) {
  Tracker tr;
  for (int f = 0; f < 10; ++f) {
    const auto out = tr.step(std::vector{trunk_at({100, 100, 60, 12, 0.2})}, f / 30.0);
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out[0].track_id, 1);
  }
}

TEST(Tracker, ResumesAfterShortGap) {
  Tracker tr;
  auto box = [](int f) { return OrientedBox{100.0 + 4 * f, 100, 60, 12, 0.0}; };
  for (int f = 0; f < 5; ++f) tr.step(std::vector{trunk_at(box(f))}, f / 30.0);
  for (int f = 5; f < 8; ++f) EXPECT_TRUE(tr.step(std::vector<UnifiedTrunk>{}, f / 30.0).empty());
  const auto out = tr.step(std::vector{trunk_at(box(8))}, 8 / 30.0);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].track_id, 1);
}

TEST(Tracker, DropsTracksBeyondBuffer) {
  TrackerConfig cfg;
  cfg.track_buffer_frames = 5;
  Tracker tr(cfg);
  tr.step(std::vector{trunk_at({100, 100, 60, 12, 0})}, 0.0);
  for (int f = 1; f <= 6; ++f) tr.step(std::vector<UnifiedTrunk>{}, f / 30.0);
  EXPECT_TRUE(tr.tracks().empty());
  const auto out = tr.step(std::vector{trunk_at({100, 100, 60, 12, 0})}, 7 / 30.0);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].track_id, 2);
}

TEST(Tracker, LostTracksHaveTimeSinceUpdate) {
  Tracker tr;
  tr.step(std::vector{trunk_at({100, 100, 60, 12, 0})}, 0.0);
  tr.step(std::vector<UnifiedTrunk>{}, 1 / 30.0);
  ASSERT_EQ(tr.tracks().size(), 1u);
  EXPECT_EQ(tr.tracks()[0].status, TrackStatus::kLost);
  EXPECT_GE(tr.tracks()[0].time_since_update, 1.0);
}

TEST(Tracker, NewTrackThreshold) {
  TrackerConfig cfg;
  cfg.new_track_thresh = 0.05;
  cfg.match_thresh = 0.9;
  {
    Tracker tr(cfg);
    EXPECT_TRUE(tr.step(std::vector{trunk_at({100, 100, 60, 12, 0}, 0.04)}, 0.0).empty());
    EXPECT_TRUE(tr.tracks().empty());
  }
  {
    Tracker tr(cfg);
    const auto out = tr.step(std::vector{trunk_at({100, 100, 60, 12, 0}, 0.05)}, 0.0);
    ASSERT_EQ(out.size(), 1u);
  }
  {
    Tracker tr;  // default 0.6
    EXPECT_TRUE(tr.step(std::vector{trunk_at({100, 100, 60, 12, 0}, 0.55)}, 0.0).empty());
  }
}

TEST(Tracker, MatchThresholdGatesAssociation) {
  // Second box overlaps the first with IoU 0.15: cost 0.85 passes a 0.9
  // gate but not a 0.8 gate.
  const OrientedBox a{100, 100, 40, 10, 0};
  const double shift = 40 * (1 - 2 * 0.15 / 1.15);
  const OrientedBox b{100 + shift, 100, 40, 10, 0};
  ASSERT_NEAR(obb_iou(a, b), 0.15, 1e-12);
  for (double gate : {0.8, 0.9}) {
    TrackerConfig cfg;
    cfg.match_thresh = gate;
    Tracker tr(cfg);
    tr.step(std::vector{trunk_at(a)}, 0.0);
    const auto out = tr.step(std::vector{trunk_at(b)}, 1 / 30.0);
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out[0].track_id, gate == 0.9 ? 1 : 2) << "gate " << gate;
  }
}

TEST(Tracker, LowConfidenceDetectionsExtendButDoNotSpawn) {
  Tracker tr;
  tr.step(std::vector{trunk_at({100, 100, 60, 12, 0})}, 0.0);
  const auto out = tr.step(std::vector{trunk_at({101, 100, 60, 12, 0}, 0.3),
                                       trunk_at({400, 300, 60, 12, 0}, 0.3)},
                           1 / 30.0);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].track_id, 1);
  EXPECT_EQ(out[0].input_index, 0u);
  EXPECT_EQ(tr.tracks().size(), 1u);
}

TEST(Tracker, BelowLowThresholdIgnored) {
  Tracker tr;
  tr.step(std::vector{trunk_at({100, 100, 60, 12, 0})}, 0.0);
  EXPECT_TRUE(tr.step(std::vector{trunk_at({100, 100, 60, 12, 0}, 0.05)}, 1 / 30.0).empty());
}

TEST(Tracker, IdsStrictlyIncreaseAndInputIndexMaps) {
  Tracker tr;
  std::int64_t last = 0;
  for (int f = 0; f < 5; ++f) {
    std::vector<UnifiedTrunk> dets;
    for (int k = 0; k <= f; ++k) dets.push_back(trunk_at({100.0 + 150 * k, 100, 60, 12, 0}));
    const auto out = tr.step(dets, f / 30.0);
    ASSERT_EQ(out.size(), dets.size());
    for (const auto& t : out) {
      EXPECT_EQ(t.trunk.envelope, dets[t.input_index].envelope);
    }
    EXPECT_GT(tr.last_track_id(), last - 1);
    last = tr.last_track_id();
    EXPECT_EQ(last, f + 1);
  }
}

TEST(Tracker, RejectsNonIncreasingTimestamps) {
  Tracker tr;
  tr.step(std::vector<UnifiedTrunk>{}, 1.0);
  try {
    tr.step(std::vector<UnifiedTrunk>{}, 1.0);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonMonotonicTimestamp);
  }
}

TEST(TrackerConfig, Validation) {
  TrackerConfig c;
  c.track_low_thresh = 0.7;  // above the high threshold
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.match_thresh = 1.2;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.track_buffer_frames = -1;
  EXPECT_THROW(c.validate(), Error);
  EXPECT_NO_THROW(TrackerConfig{}.validate());
}

TEST(TrackSequence, MovingTrunksKeepIds) {
  std::vector<FusedFrame> frames;
  for (int f = 0; f < 30; ++f) {
    FusedFrame fr{f, f / 30.0, {}};
    for (int k = 0; k < 5; ++k) {
      fr.trunks.push_back(trunk_at({100.0 + 200 * k + 2 * f, 100.0 + 100 * k - f, 80, 16, 0.3 * k}));
    }
    frames.push_back(fr);
  }
  const auto out = track_sequence(frames, {});
  ASSERT_EQ(out.size(), frames.size());
  for (const auto& f : out) {
    ASSERT_EQ(f.tracks.size(), 5u);
    for (const auto& t : f.tracks) {
      EXPECT_EQ(t.track_id, static_cast<std::int64_t>(t.input_index) + 1);
    }
  }
}

}  // namespace
}  // namespace trunkfuse
