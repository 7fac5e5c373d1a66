// Copyright 2026 The trunkfuse Authors
// SPDX-License-Identifier: Apache-2.0

#include "trunkfuse/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace trunkfuse {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Requires rows <= cols. Returns col index per row.
std::vector<std::size_t> solve_wide(const CostMatrix& cost) {
  const std::size_t nr = cost.rows();
  const std::size_t nc = cost.cols();
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  std::vector<double> u(nr, 0.0), v(nc, 0.0), path_cost(nc);
  std::vector<std::size_t> path(nc, kNone), col4row(nr, kNone),
      row4col(nc, kNone), remaining(nc);
  std::vector<char> seen_row(nr), seen_col(nc);

  for (std::size_t cur = 0; cur < nr; ++cur) {
    double min_val = 0.0;
    std::size_t num_remaining = nc;
    for (std::size_t j = 0; j < nc; ++j) remaining[j] = nc - j - 1;
    std::fill(seen_row.begin(), seen_row.end(), 0);
    std::fill(seen_col.begin(), seen_col.end(), 0);
    std::fill(path_cost.begin(), path_cost.end(), kInf);

    std::size_t sink = kNone;
    std::size_t i = cur;
    while (sink == kNone) {
      seen_row[i] = 1;
      std::size_t index = kNone;
      double lowest = kInf;
      for (std::size_t it = 0; it < num_remaining; ++it) {
        const std::size_t j = remaining[it];
        const double r = min_val + cost(i, j) - u[i] - v[j];
        if (r < path_cost[j]) {
          path[j] = i;
          path_cost[j] = r;
        }
        // Ties prefer a free column so the augmenting path ends early.
        if (path_cost[j] < lowest ||
            (path_cost[j] == lowest && row4col[j] == kNone)) {
          lowest = path_cost[j];
          index = it;
        }
      }
      min_val = lowest;
      const std::size_t j = remaining[index];
      if (row4col[j] == kNone) {
        sink = j;
      } else {
        i = row4col[j];
      }
      seen_col[j] = 1;
      remaining[index] = remaining[--num_remaining];
    }

    u[cur] += min_val;
    for (std::size_t r = 0; r < nr; ++r) {
      if (seen_row[r] && r != cur) u[r] += min_val - path_cost[col4row[r]];
    }
    for (std::size_t c = 0; c < nc; ++c) {
      if (seen_col[c]) v[c] -= min_val - path_cost[c];
    }
    std::size_t j = sink;
    while (true) {
      const std::size_t r = path[j];
      row4col[j] = r;
      std::swap(col4row[r], j);
      if (r == cur) break;
    }
  }
  return col4row;
}

}  // namespace

std::vector<Assignment> linear_sum_assignment(const CostMatrix& cost) {
  std::vector<Assignment> out;
  if (cost.empty()) return out;
  if (cost.rows() <= cost.cols()) {
    const auto cols = solve_wide(cost);
    for (std::size_t r = 0; r < cols.size(); ++r) out.push_back({r, cols[r]});
  } else {
    CostMatrix t(cost.cols(), cost.rows());
    for (std::size_t r = 0; r < cost.rows(); ++r) {
      for (std::size_t c = 0; c < cost.cols(); ++c) t(c, r) = cost(r, c);
    }
    const auto rows = solve_wide(t);
    for (std::size_t c = 0; c < rows.size(); ++c) out.push_back({rows[c], c});
    std::sort(out.begin(), out.end(),
              [](const Assignment& a, const Assignment& b) { return a.row < b.row; });
  }
  return out;
}

std::vector<Assignment> assign_with_cost_limit(const CostMatrix& cost,
                                               double limit) {
  const std::size_t m = cost.rows();
  const std::size_t n = cost.cols();
  if (m == 0 || n == 0) return {};
  // Unmatched slack is nudged above limit/2 so pairs at exactly `limit` win.
  const double slack = limit / 2.0 + 1e-12 * (1.0 + std::abs(limit));
  double big = 1.0;
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t c = 0; c < n; ++c) big += std::abs(cost(r, c));
  }
  big += (m + n) * std::abs(slack) + 1.0;

  CostMatrix ext(m + n, n + m, big);
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t c = 0; c < n; ++c) ext(r, c) = cost(r, c);
    ext(r, n + r) = slack;
  }
  for (std::size_t c = 0; c < n; ++c) ext(m + c, c) = slack;
  for (std::size_t r = m; r < m + n; ++r) {
    for (std::size_t c = n; c < n + m; ++c) ext(r, c) = 0.0;
  }
  std::vector<Assignment> out;
  for (const auto& a : linear_sum_assignment(ext)) {
    if (a.row < m && a.col < n && cost(a.row, a.col) <= limit) out.push_back(a);
  }
  return out;
}

std::vector<Assignment> assign_admissible(const CostMatrix& cost,
                                          double max_cost) {
  const std::size_t m = cost.rows();
  const std::size_t n = cost.cols();
  if (m == 0 || n == 0) return {};
  double spread = 1.0;
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      if (cost(r, c) <= max_cost) spread += std::abs(cost(r, c));
    }
  }
  const double big = 2.0 * spread * static_cast<double>(std::min(m, n) + 1);
  CostMatrix gated(m, n);
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      gated(r, c) = cost(r, c) <= max_cost ? cost(r, c) : big;
    }
  }
  std::vector<Assignment> out;
  for (const auto& a : linear_sum_assignment(gated)) {
    if (cost(a.row, a.col) <= max_cost) out.push_back(a);
  }
  return out;
}

double assignment_cost(const CostMatrix& cost,
                       const std::vector<Assignment>& pairs) {
  double total = 0.0;
  for (const auto& a : pairs) total += cost(a.row, a.col);
  return total;
}

}  // namespace trunkfuse
