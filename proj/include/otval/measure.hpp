#pragma once

#include "otval/types.hpp"

namespace otval {

inline constexpr double kWeightSumTolerance = 1e-9;

/// Finitely supported probability measure: `support` holds one atom per row,
/// `weights` the mass of each atom.
struct DiscreteMeasure {
  Matrix support;
  Vector weights;

  Index size() const { return support.rows(); }
  Index dim() const { return support.cols(); }

  /// Uniform weights 1/n over the rows of `support`.
  static DiscreteMeasure uniform(Matrix support);

  /// Throws InputError unless n >= 1, d >= 1, coordinates are finite, weights
  /// are nonnegative and sum to one within kWeightSumTolerance.
  void validate() const;
};

/// Throws InputError when `w` is not a probability vector of length `n`.
void validate_weights(const Vector& w, Index n, const char* what);

}  // namespace otval
