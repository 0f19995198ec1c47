// Copyright 2026 The unitailkit Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef UNITAIL_HUNGARIAN_HPP_
#define UNITAIL_HUNGARIAN_HPP_

#include <cstddef>
#include <utility>
#include <vector>

namespace unitail::matching {

// Dense row-major matrix of assignment costs.
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
  // (row, col) pairs sorted by row; exactly min(rows, cols) of them.
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  double total_cost = 0.0;
};

// Minimum-cost assignment (Kuhn-Munkres with row potentials, O(n^2 m)).
// Rectangular inputs behave as if padded with zero-cost dummy rows or
// columns. Throws InputError on non-finite entries.
Assignment hungarian(const CostMatrix& cost);

}  // namespace unitail::matching

#endif  // UNITAIL_HUNGARIAN_HPP_
