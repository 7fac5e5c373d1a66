// Copyright 2026 The trunkfuse Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

namespace trunkfuse {

// Dense row-major cost matrix.
class CostMatrix {
 public:
  CostMatrix() = default;
  CostMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0 || cols_ == 0; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct Assignment {
  std::size_t row;
  std::size_t col;
  friend bool operator==(const Assignment&, const Assignment&) = default;
};

// Minimum-cost one-to-one assignment of size min(rows, cols), solved with
// shortest augmenting paths (Jonker-Volgenant family). Result sorted by row.
// Costs must be finite.
std::vector<Assignment> linear_sum_assignment(const CostMatrix& cost);

// Every row and column may stay unassigned at cost limit/2; a pair is only
// used when that is cheaper, so no returned pair exceeds `limit`.
std::vector<Assignment> assign_with_cost_limit(const CostMatrix& cost,
                                               double limit);

// Pairs costing more than `max_cost` are forbidden. Maximizes the number of
// admissible pairs first, then minimizes their total cost.
std::vector<Assignment> assign_admissible(const CostMatrix& cost,
                                          double max_cost);

double assignment_cost(const CostMatrix& cost,
                       const std::vector<Assignment>& pairs);

}  // namespace trunkfuse
