// Copyright 2026 The unitailkit Authors.
// SPDX-License-Identifier: Apache-2.0

#include "unitail/hungarian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "unitail/error.hpp"

namespace unitail::matching {

namespace {

// Shortest augmenting path formulation for rows <= cols. Index 0 of the
// potential and match arrays is a sentinel; real rows and columns are
// 1-based.
std::vector<std::size_t> solve_wide(const CostMatrix& a, bool transposed) {
  const std::size_t n = transposed ? a.cols() : a.rows();
  const std::size_t m = transposed ? a.rows() : a.cols();
  auto cost = [&](std::size_t i, std::size_t j) { return transposed ? a(j, i) : a(i, j); };
  constexpr double kInf = std::numeric_limits<double>::infinity();

  std::vector<double> u(n + 1, 0.0);
  std::vector<double> v(m + 1, 0.0);
  std::vector<std::size_t> row_of_col(m + 1, 0);
  std::vector<std::size_t> way(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    row_of_col[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(m + 1, kInf);
    std::vector<bool> used(m + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = row_of_col[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double reduced = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (reduced < minv[j]) {
          minv[j] = reduced;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[row_of_col[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (row_of_col[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      row_of_col[j0] = row_of_col[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  // col_of_row[i] for the n (short side) rows.
  std::vector<std::size_t> col_of_row(n, 0);
  for (std::size_t j = 1; j <= m; ++j) {
    if (row_of_col[j] != 0) col_of_row[row_of_col[j] - 1] = j - 1;
  }
  return col_of_row;
}

}  // namespace

Assignment hungarian(const CostMatrix& cost) {
  Assignment out;
  if (cost.empty()) return out;
  for (std::size_t r = 0; r < cost.rows(); ++r) {
    for (std::size_t c = 0; c < cost.cols(); ++c) {
      if (!std::isfinite(cost(r, c))) throw InputError("cost matrix has a non-finite entry");
    }
  }
  const bool transposed = cost.rows() > cost.cols();
  const std::vector<std::size_t> match = solve_wide(cost, transposed);
  for (std::size_t k = 0; k < match.size(); ++k) {
    if (transposed) {
      out.pairs.emplace_back(match[k], k);
    } else {
      out.pairs.emplace_back(k, match[k]);
    }
  }
  std::sort(out.pairs.begin(), out.pairs.end());
  for (const auto& [r, c] : out.pairs) out.total_cost += cost(r, c);
  return out;
}

}  // namespace unitail::matching
