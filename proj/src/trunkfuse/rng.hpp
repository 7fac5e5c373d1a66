// Copyright 2026 The trunkfuse Authors
// SPDX-License-Identifier: Apache-2.0

// Counter-based random streams: every (seed, stream key) pair yields an
// independent sequence, so results do not depend on generation order.

#pragma once

#include <cstdint>
#include <initializer_list>

namespace trunkfuse {

std::uint64_t mix64(std::uint64_t x);

class Rng {
 public:
  Rng(std::uint64_t seed, std::initializer_list<std::uint64_t> stream);

  std::uint64_t next();
  double uniform();  // [0, 1)
  double uniform(double lo, double hi);
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);  // inclusive
  double normal();
  double normal(double mean, double sigma) { return mean + sigma * normal(); }
  bool bernoulli(double p) { return uniform() < p; }
  std::int64_t poisson(double lambda);

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace trunkfuse
