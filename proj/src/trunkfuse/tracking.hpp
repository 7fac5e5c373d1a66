// Copyright 2026 The trunkfuse Authors
// SPDX-License-Identifier: Apache-2.0

// Two-stage (high/low confidence) tracking of trunk envelope boxes with a
// constant-velocity Kalman filter over (cx, cy, w, h, angle).

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "trunkfuse/model.hpp"

namespace trunkfuse {

using StateVector = Eigen::Matrix<double, 10, 1>;
using StateMatrix = Eigen::Matrix<double, 10, 10>;

struct KalmanNoise {
  // Standard deviations relative to box height (pixels per pixel of height).
  double position = 1.0 / 20.0;
  double velocity = 1.0 / 40.0;
  // Angle standard deviations in radians.
  double angle = 0.02;
  double angle_velocity = 0.01;
};

// mean = (cx, cy, w, h, angle, and per-frame velocities of each). The angle
// is kept continuous across updates rather than wrapped.
struct KalmanState {
  StateVector mean = StateVector::Zero();
  StateMatrix covariance = StateMatrix::Identity();

  OrientedBox box() const;  // canonical box of the current mean
};

KalmanState kalman_initiate(const OrientedBox& measurement,
                            const KalmanNoise& noise = {});
KalmanState kalman_predict(const KalmanState& state, double dt_frames,
                           const KalmanNoise& noise = {});
KalmanState kalman_update(const KalmanState& state, const OrientedBox& measurement,
                          const KalmanNoise& noise = {});

// The representation of `measurement` among (w, h, a + k*pi) and
// (h, w, a + pi/2 + k*pi) closest to the state mean.
Eigen::Matrix<double, 5, 1> align_measurement(const StateVector& mean,
                                              const OrientedBox& measurement);

enum class TrackStatus { kTentative, kConfirmed, kLost };

struct Track {
  std::int64_t track_id = 0;
  KalmanState state;
  UnifiedTrunk last_trunk;
  TrackStatus status = TrackStatus::kConfirmed;
  std::int64_t age = 0;             // frames since creation
  double time_since_update = 0.0;   // frames
};

struct TrackerConfig {
  double track_high_thresh = 0.5;
  double track_low_thresh = 0.1;
  double new_track_thresh = 0.6;
  double match_thresh = 0.8;
  // Cost limit for the low-confidence stage.
  double low_match_thresh = 0.5;
  int track_buffer_frames = 30;
  double frame_rate = 30.0;
  KalmanNoise noise;

  // Throws InvalidConfig.
  void validate() const;
};

class Tracker {
 public:
  explicit Tracker(TrackerConfig cfg = {});

  // Associates one frame of trunks and returns the tracks updated in this
  // frame, sorted by track id. Timestamps must strictly increase.
  std::vector<TrackedTrunk> step(std::span<const UnifiedTrunk> trunks,
                                 double timestamp_s);

  const std::vector<Track>& tracks() const { return tracks_; }
  const TrackerConfig& config() const { return cfg_; }
  std::int64_t last_track_id() const { return next_id_ - 1; }

 private:
  TrackerConfig cfg_;
  std::vector<Track> tracks_;
  std::int64_t next_id_ = 1;
  std::optional<double> last_timestamp_;
};

std::vector<TrackedFrame> track_sequence(std::span<const FusedFrame> frames,
                                         const TrackerConfig& cfg);

}  // namespace trunkfuse
