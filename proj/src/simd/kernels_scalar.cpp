#include <cmath>
#include <limits>

#include "otval/simd/kernels.hpp"

namespace otval::simd::scalar {

void pairwise_sqdist(const double* x, std::size_t n, const double* yt, std::size_t m,
                     std::size_t d, double* out) {
  for (std::size_t i = 0; i < n; ++i) {
    const double* xi = x + i * d;
    double* row = out + i * m;
    for (std::size_t j = 0; j < m; ++j) row[j] = 0.0;
    // Same accumulation order as the vector variant: coordinate-major.
    for (std::size_t k = 0; k < d; ++k) {
      const double xk = xi[k];
      const double* yk = yt + k * m;
      for (std::size_t j = 0; j < m; ++j) {
        const double diff = yk[j] - xk;
        row[j] = row[j] + diff * diff;
      }
    }
  }
}

ArgMin argmin_reduced_cost(const double* cost, const std::int8_t* state, double pi_src,
                           const double* pi_tgt, std::size_t len) {
  ArgMin best{std::numeric_limits<double>::infinity(), 0};
  for (std::size_t j = 0; j < len; ++j) {
    const double c = static_cast<double>(state[j]) * ((cost[j] + pi_src) - pi_tgt[j]);
    if (c < best.value) {
      best.value = c;
      best.index = j;
    }
  }
  return best;
}

double scaled_logsumexp(const double* c, const double* h, double inv_eps, std::size_t len) {
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < len; ++j) {
    const double v = h[j] - c[j] * inv_eps;
    if (v > mx) mx = v;
  }
  if (!std::isfinite(mx)) return mx;
  double sum = 0.0;
  for (std::size_t j = 0; j < len; ++j) {
    sum += std::exp((h[j] - c[j] * inv_eps) - mx);
  }
  return mx + std::log(sum);
}

void exp_inplace(double* v, std::size_t len) {
  for (std::size_t j = 0; j < len; ++j) v[j] = std::exp(v[j]);
}

}  // namespace otval::simd::scalar
