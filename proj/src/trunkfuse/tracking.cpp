// Copyright 2026 The trunkfuse Authors
// SPDX-License-Identifier: Apache-2.0

#include "trunkfuse/tracking.hpp"

#include <algorithm>
#include <cmath>

#include "trunkfuse/assignment.hpp"
#include "trunkfuse/error.hpp"

namespace trunkfuse {

namespace {

using Measurement = Eigen::Matrix<double, 5, 1>;
using MeasurementMatrix = Eigen::Matrix<double, 5, 5>;

constexpr double kMinExtent = 1e-3;

// Into (-pi/2, pi/2].
double wrap_half_pi(double a) {
  double r = std::fmod(a, kPi);
  if (r <= -kPi / 2) r += kPi;
  if (r > kPi / 2) r -= kPi;
  return r;
}

double scale_of(const StateVector& mean) { return std::max(mean(3), 1.0); }

MeasurementMatrix measurement_noise(const StateVector& mean, const KalmanNoise& n) {
  const double s = n.position * scale_of(mean);
  MeasurementMatrix r = MeasurementMatrix::Zero();
  r.diagonal() << s * s, s * s, s * s, s * s, n.angle * n.angle;
  return r;
}

StateMatrix process_noise(const StateVector& mean, const KalmanNoise& n) {
  const double h = scale_of(mean);
  const double p = n.position * h;
  const double v = n.velocity * h;
  StateMatrix q = StateMatrix::Zero();
  q.diagonal() << p * p, p * p, p * p, p * p, n.angle * n.angle, v * v, v * v, v * v,
      v * v, n.angle_velocity * n.angle_velocity;
  return q;
}

void clamp_extent(StateVector& mean) {
  mean(2) = std::max(mean(2), kMinExtent);
  mean(3) = std::max(mean(3), kMinExtent);
}

void symmetrize(StateMatrix& m) { m = 0.5 * (m + m.transpose()).eval(); }

}  // namespace

OrientedBox KalmanState::box() const {
  return canonicalize_obb({mean(0), mean(1), std::max(mean(2), kMinExtent),
                           std::max(mean(3), kMinExtent), mean(4)});
}

Measurement align_measurement(const StateVector& mean, const OrientedBox& m) {
  const double theta = mean(4);
  const double a = theta + wrap_half_pi(m.angle - theta);
  const double b = theta + wrap_half_pi(m.angle + kPi / 2 - theta);
  const double size = 0.5 * (std::abs(mean(2)) + std::abs(mean(3)));
  const double cost_a = std::abs(m.width - mean(2)) + std::abs(m.height - mean(3)) +
                        std::abs(a - theta) * size;
  const double cost_b = std::abs(m.height - mean(2)) + std::abs(m.width - mean(3)) +
                        std::abs(b - theta) * size;
  Measurement z;
  if (cost_a <= cost_b) {
    z << m.cx, m.cy, m.width, m.height, a;
  } else {
    z << m.cx, m.cy, m.height, m.width, b;
  }
  return z;
}

KalmanState kalman_initiate(const OrientedBox& m, const KalmanNoise& noise) {
  KalmanState s;
  s.mean.setZero();
  s.mean.head<5>() << m.cx, m.cy, m.width, m.height, m.angle;
  const double h = scale_of(s.mean);
  const double p = 2.0 * noise.position * h;
  const double v = 10.0 * noise.velocity * h;
  const double a = 2.0 * noise.angle;
  const double av = 10.0 * noise.angle_velocity;
  s.covariance.setZero();
  s.covariance.diagonal() << p * p, p * p, p * p, p * p, a * a, v * v, v * v, v * v,
      v * v, av * av;
  return s;
}

KalmanState kalman_predict(const KalmanState& state, double dt, const KalmanNoise& noise) {
  StateMatrix f = StateMatrix::Identity();
  for (int i = 0; i < 5; ++i) f(i, i + 5) = dt;
  KalmanState out;
  out.mean = f * state.mean;
  clamp_extent(out.mean);
  out.covariance = f * state.covariance * f.transpose() +
                   process_noise(state.mean, noise) * std::max(dt, 0.0);
  symmetrize(out.covariance);
  return out;
}

KalmanState kalman_update(const KalmanState& state, const OrientedBox& measurement,
                          const KalmanNoise& noise) {
  Eigen::Matrix<double, 5, 10> h = Eigen::Matrix<double, 5, 10>::Zero();
  h.leftCols<5>().setIdentity();
  const Measurement z = align_measurement(state.mean, measurement);
  const Measurement y = z - h * state.mean;
  const MeasurementMatrix r = measurement_noise(state.mean, noise);
  const MeasurementMatrix s = h * state.covariance * h.transpose() + r;
  const Eigen::Matrix<double, 10, 5> k =
      s.llt().solve(h * state.covariance).transpose();
  KalmanState out;
  out.mean = state.mean + k * y;
  clamp_extent(out.mean);
  const StateMatrix i_kh = StateMatrix::Identity() - k * h;
  out.covariance = i_kh * state.covariance * i_kh.transpose() + k * r * k.transpose();
  symmetrize(out.covariance);
  return out;
}

void TrackerConfig::validate() const {
  auto unit = [](double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw Error(ErrorCode::kInvalidConfig,
                  std::string(name) + " = " + std::to_string(v) + " outside [0, 1]");
    }
  };
  unit(track_high_thresh, "track-high-thresh");
  unit(track_low_thresh, "track-low-thresh");
  unit(new_track_thresh, "new-track-thresh");
  unit(match_thresh, "match-thresh");
  unit(low_match_thresh, "low-match-thresh");
  if (track_low_thresh > track_high_thresh) {
    throw Error(ErrorCode::kInvalidConfig,
                "track-low-thresh must not exceed track-high-thresh");
  }
  if (track_buffer_frames < 0) {
    throw Error(ErrorCode::kInvalidConfig, "track-buffer must be >= 0");
  }
  if (!(frame_rate > 0.0)) {
    throw Error(ErrorCode::kInvalidConfig, "frame-rate must be positive");
  }
}

Tracker::Tracker(TrackerConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

std::vector<TrackedTrunk> Tracker::step(std::span<const UnifiedTrunk> trunks,
                                        double timestamp_s) {
  if (last_timestamp_ && !(timestamp_s > *last_timestamp_)) {
    throw Error(ErrorCode::kNonMonotonicTimestamp,
                "timestamp " + std::to_string(timestamp_s) + " does not follow " +
                    std::to_string(*last_timestamp_));
  }
  const double dt = last_timestamp_ ? (timestamp_s - *last_timestamp_) * cfg_.frame_rate : 1.0;
  last_timestamp_ = timestamp_s;

  for (Track& t : tracks_) {
    t.state = kalman_predict(t.state, dt, cfg_.noise);
    t.time_since_update += dt;
  }

  std::vector<std::size_t> high;
  std::vector<std::size_t> low;
  for (std::size_t i = 0; i < trunks.size(); ++i) {
    const double c = trunks[i].confidence;
    if (c >= cfg_.track_high_thresh) {
      high.push_back(i);
    } else if (c >= cfg_.track_low_thresh) {
      low.push_back(i);
    }
  }

  std::vector<bool> track_matched(tracks_.size(), false);
  std::vector<bool> det_matched(trunks.size(), false);
  std::vector<TrackedTrunk> out;

  auto associate = [&](const std::vector<std::size_t>& dets, double limit) {
    std::vector<std::size_t> pool;
    for (std::size_t t = 0; t < tracks_.size(); ++t) {
      if (!track_matched[t]) pool.push_back(t);
    }
    if (pool.empty() || dets.empty()) return;
    std::vector<OrientedBox> predicted;
    for (std::size_t t : pool) predicted.push_back(tracks_[t].state.box());
    CostMatrix cost(pool.size(), dets.size());
    for (std::size_t r = 0; r < pool.size(); ++r) {
      for (std::size_t c = 0; c < dets.size(); ++c) {
        cost(r, c) = 1.0 - obb_iou(predicted[r], trunks[dets[c]].envelope);
      }
    }
    for (const Assignment& a : assign_with_cost_limit(cost, limit)) {
      Track& t = tracks_[pool[a.row]];
      const UnifiedTrunk& d = trunks[dets[a.col]];
      t.state = kalman_update(t.state, d.envelope, cfg_.noise);
      t.last_trunk = d;
      t.status = TrackStatus::kConfirmed;
      t.time_since_update = 0.0;
      track_matched[pool[a.row]] = true;
      det_matched[dets[a.col]] = true;
      out.push_back({t.track_id, d, dets[a.col]});
    }
  };
  associate(high, cfg_.match_thresh);
  associate(low, cfg_.low_match_thresh);

  std::vector<Track> kept;
  kept.reserve(tracks_.size());
  for (std::size_t t = 0; t < tracks_.size(); ++t) {
    Track& tr = tracks_[t];
    ++tr.age;
    if (!track_matched[t]) {
      tr.status = TrackStatus::kLost;
      if (tr.time_since_update > cfg_.track_buffer_frames) continue;
    }
    kept.push_back(std::move(tr));
  }
  tracks_ = std::move(kept);

  for (std::size_t i = 0; i < trunks.size(); ++i) {
    if (det_matched[i] || trunks[i].confidence < cfg_.new_track_thresh) continue;
    Track t;
    t.track_id = next_id_++;
    t.state = kalman_initiate(trunks[i].envelope, cfg_.noise);
    t.last_trunk = trunks[i];
    t.status = TrackStatus::kConfirmed;
    tracks_.push_back(t);
    out.push_back({t.track_id, trunks[i], i});
  }

  std::sort(out.begin(), out.end(), [](const TrackedTrunk& a, const TrackedTrunk& b) {
    return a.track_id < b.track_id;
  });
  return out;
}

std::vector<TrackedFrame> track_sequence(std::span<const FusedFrame> frames,
                                         const TrackerConfig& cfg) {
  Tracker tracker(cfg);
  std::vector<TrackedFrame> out;
  out.reserve(frames.size());
  for (const FusedFrame& f : frames) {
    out.push_back({f.frame_id, f.timestamp_s, tracker.step(f.trunks, f.timestamp_s)});
  }
  return out;
}

}  // namespace trunkfuse
