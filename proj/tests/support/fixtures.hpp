#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "otval/measure.hpp"
#include "otval/types.hpp"

namespace otval::testing {

inline Matrix gaussian_points(Index n, Index d, std::uint64_t seed, double scale = 1.0,
                              double shift = 0.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  Matrix x(n, d);
  for (Index i = 0; i < n; ++i)
    for (Index k = 0; k < d; ++k) x(i, k) = shift + scale * nd(rng);
  return x;
}

inline Vector random_simplex(Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  Vector w(n);
  for (Index i = 0; i < n; ++i) w[i] = u(rng);
  return w / w.sum();
}

inline DiscreteMeasure from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix x(static_cast<Index>(rows.size()), static_cast<Index>(rows.begin()->size()));
  Index i = 0;
  for (const auto& r : rows) {
    Index k = 0;
    for (double v : r) x(i, k++) = v;
    ++i;
  }
  return DiscreteMeasure::uniform(x);
}

// Plain O(n m d) cost computed without the library kernels.
inline Matrix naive_cost(const Matrix& x, const Matrix& y, double p) {
  Matrix c(x.rows(), y.rows());
  for (Index i = 0; i < x.rows(); ++i)
    for (Index j = 0; j < y.rows(); ++j) {
      double s = 0.0;
      for (Index k = 0; k < x.cols(); ++k) s += (x(i, k) - y(j, k)) * (x(i, k) - y(j, k));
      c(i, j) = std::pow(std::sqrt(s), p);
    }
  return c;
}

// For equal-size uniform measures the optimum is a permutation (Birkhoff).
inline double brute_force_assignment(const Matrix& c) {
  const Index n = c.rows();
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  double best = std::numeric_limits<double>::infinity();
  do {
    double s = 0.0;
    for (Index i = 0; i < n; ++i) s += c(i, perm[static_cast<std::size_t>(i)]);
    best = std::min(best, s);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best / static_cast<double>(n);
}

}  // namespace otval::testing
