// Copyright 2026 The trunkfuse Authors
// SPDX-License-Identifier: Apache-2.0

#include "trunkfuse/assignment.hpp"

#include <gtest/gtest.h>

#include <random>

#include "support/oracles.hpp"

namespace trunkfuse {
namespace {

CostMatrix from_rows(const std::vector<std::vector<double>>& rows) {
  CostMatrix m(rows.size(), rows.empty() ? 0 : rows[0].size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) m(r, c) = rows[r][c];
  }
  return m;
}

TEST(LinearSumAssignment, Examples) {
  EXPECT_EQ(linear_sum_assignment(from_rows({{5}})), (std::vector<Assignment>{{0, 0}}));
  const CostMatrix m = from_rows({{1, 2}, {2, 4}});
  const auto a = linear_sum_assignment(m);
  EXPECT_EQ(a, (std::vector<Assignment>{{0, 1}, {1, 0}}));
  EXPECT_DOUBLE_EQ(assignment_cost(m, a), 4.0);
  EXPECT_TRUE(linear_sum_assignment(CostMatrix(0, 3)).empty());
  EXPECT_TRUE(linear_sum_assignment(CostMatrix(3, 0)).empty());
}

TEST(LinearSumAssignment, TiesBreakTowardLowestIndices) {
  const auto a = linear_sum_assignment(CostMatrix(3, 3, 1.0));
  EXPECT_EQ(a, (std::vector<Assignment>{{0, 0}, {1, 1}, {2, 2}}));
  const auto wide = linear_sum_assignment(CostMatrix(2, 4, 0.0));
  EXPECT_EQ(wide, (std::vector<Assignment>{{0, 0}, {1, 1}}));
}

TEST(LinearSumAssignment, MatchesExhaustiveOptimum) {
  std::mt19937_64 gen(41);
  std::uniform_int_distribution<int> dim(1, 6);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int i = 0; i < 300; ++i) {
    const int r = dim(gen);
    const int c = dim(gen);
    std::vector<std::vector<double>> rows(r, std::vector<double>(c));
    for (auto& row : rows) {
      for (double& v : row) v = i % 3 == 0 ? std::round(u(gen)) : u(gen);
    }
    const CostMatrix m = from_rows(rows);
    const auto a = linear_sum_assignment(m);
    ASSERT_EQ(a.size(), static_cast<std::size_t>(std::min(r, c)));
    std::vector<bool> used_r(r), used_c(c);
    for (const auto& p : a) {
      EXPECT_FALSE(used_r[p.row]);
      EXPECT_FALSE(used_c[p.col]);
      used_r[p.row] = used_c[p.col] = true;
    }
    EXPECT_NEAR(assignment_cost(m, a), testing::brute_force_assignment(rows), 1e-9);
  }
}

TEST(AssignWithCostLimit, NeverExceedsLimit) {
  const CostMatrix m = from_rows({{0.1, 0.9}, {0.95, 0.2}});
  EXPECT_EQ(assign_with_cost_limit(m, 0.5), (std::vector<Assignment>{{0, 0}, {1, 1}}));
  const CostMatrix far = from_rows({{0.9}});
  EXPECT_TRUE(assign_with_cost_limit(far, 0.5).empty());

  std::mt19937_64 gen(43);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    CostMatrix c(1 + i % 5, 1 + (i / 5) % 5);
    for (std::size_t r = 0; r < c.rows(); ++r) {
      for (std::size_t k = 0; k < c.cols(); ++k) c(r, k) = u(gen);
    }
    for (const auto& p : assign_with_cost_limit(c, 0.4)) EXPECT_LE(c(p.row, p.col), 0.4);
  }
}

TEST(AssignAdmissible, MaximizesCardinalityFirst) {
  // Greedy on cost would take (0,0) and leave row 1 unmatched.
  const CostMatrix m = from_rows({{0.1, 0.4}, {0.3, 9.0}});
  const auto a = assign_admissible(m, 1.0);
  EXPECT_EQ(a, (std::vector<Assignment>{{0, 1}, {1, 0}}));
  EXPECT_TRUE(assign_admissible(from_rows({{2.0}}), 1.0).empty());
}

}  // namespace
}  // namespace trunkfuse
