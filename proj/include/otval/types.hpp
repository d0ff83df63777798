#pragma once

#include <Eigen/Dense>

namespace otval {

// Point sets and couplings are row-major: one atom (or one source) per row,
// which keeps the per-row kernels contiguous.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

}  // namespace otval
