#pragma once

#include "otval/types.hpp"

namespace otval {

/// Ground cost C_ij = ||x_i - y_j||_2^p between two point sets.
struct CostMatrix {
  Matrix entries;
  double power = 2.0;

  Index rows() const { return entries.rows(); }
  Index cols() const { return entries.cols(); }
};

/// Pairwise Euclidean cost raised to `p` (p >= 1). Throws InputError on empty
/// inputs, mismatched dimensions or p < 1.
CostMatrix cost_matrix(const Matrix& x, const Matrix& y, double p = 2.0);

}  // namespace otval
