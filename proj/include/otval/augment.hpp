#pragma once

#include <vector>

#include "otval/measure.hpp"
#include "otval/types.hpp"

namespace otval {

/// Features (n x d) with integer labels in [0, num_classes).
struct LabeledDataset {
  Matrix features;
  std::vector<int> labels;
  int num_classes = 1;

  Index size() const { return features.rows(); }
  Index dim() const { return features.cols(); }
  void validate() const;
};

enum class CovarianceMode {
  kAuto,      ///< full up to kDiagonalThreshold features, diagonal above
  kFull,      ///< trailing block vec(Sigma^{1/2}), d*d entries
  kDiagonal,  ///< trailing block sqrt(diag Sigma), d entries
};

inline constexpr Index kDiagonalThreshold = 32;
inline constexpr double kDefaultRegularization = 1e-6;

struct ClassEntry {
  Vector mean;
  Matrix covariance;  ///< regularized, d x d (diagonal in diagonal mode)
  Matrix sqrt_cov;    ///< symmetric PSD root of `covariance`
  Index count = 0;
  bool empty = false;  ///< no samples; mean 0 and identity-scaled covariance
};

struct ClassStats {
  std::vector<ClassEntry> classes;
  bool diagonal = false;
  Index feature_dim = 0;

  /// d + d + d^2 (full) or 3d (diagonal).
  Index stacked_dim() const;
};

/// Per-class ML mean and covariance (1/n normalization), regularized by
/// reg * (tr Sigma / d) * I (scale 1 when the trace vanishes).
ClassStats class_stats(const LabeledDataset& data, double regularization = kDefaultRegularization,
                       CovarianceMode mode = CovarianceMode::kAuto);

struct AugmentedDataset {
  Matrix stacked;  ///< row j = [x_j; m_{y_j}; vec(Sigma_{y_j}^{1/2})]
  std::vector<int> labels;
  Index feature_dim = 0;

  Index size() const { return stacked.rows(); }
  Index dim() const { return stacked.cols(); }
  /// Uniform measure over the stacked rows.
  DiscreteMeasure measure() const;
};

AugmentedDataset stack(const LabeledDataset& data, const ClassStats& stats);

/// class_stats followed by stack.
AugmentedDataset augment(const LabeledDataset& data,
                         double regularization = kDefaultRegularization,
                         CovarianceMode mode = CovarianceMode::kAuto);

/// ||m_a - m_b||^2 + ||Sigma_a^{1/2} - Sigma_b^{1/2}||_F^2.
double gaussian_w2_squared(const ClassEntry& a, const ClassEntry& b);

/// Symmetric PSD square root via eigendecomposition; negative eigenvalues
/// are clamped to zero.
Matrix psd_sqrt(const Matrix& s);

}  // namespace otval
