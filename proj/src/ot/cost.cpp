#include "otval/ot/cost.hpp"

#include <cmath>
#include <string>

#include "otval/error.hpp"
#include "otval/simd/kernels.hpp"

namespace otval {

CostMatrix cost_matrix(const Matrix& x, const Matrix& y, double p) {
  if (x.rows() < 1 || y.rows() < 1) throw InputError("cost_matrix: empty point set");
  if (x.cols() != y.cols()) {
    throw InputError("cost_matrix: dimension mismatch (" + std::to_string(x.cols()) + " vs " +
                     std::to_string(y.cols()) + ")");
  }
  if (!(p >= 1.0) || !std::isfinite(p)) throw InputError("cost_matrix: power must be >= 1");

  const Index n = x.rows();
  const Index m = y.rows();
  const Index d = x.cols();
  const Matrix yt = y.transpose();

  CostMatrix c;
  c.power = p;
  c.entries.resize(n, m);
  simd::pairwise_sqdist(x.data(), static_cast<std::size_t>(n), yt.data(),
                        static_cast<std::size_t>(m), static_cast<std::size_t>(d),
                        c.entries.data());

  if (p == 2.0) return c;
  double* e = c.entries.data();
  const Index total = n * m;
  if (p == 1.0) {
    for (Index k = 0; k < total; ++k) e[k] = std::sqrt(e[k]);
  } else {
    const double half = 0.5 * p;
    for (Index k = 0; k < total; ++k) e[k] = std::pow(e[k], half);
  }
  return c;
}

}  // namespace otval
