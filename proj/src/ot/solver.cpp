#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "otval/error.hpp"
#include "otval/ot/wasserstein.hpp"

namespace otval {

void normalize_potentials(DualPotentials& potentials, const Vector& target_weights) {
  const double shift = potentials.g.dot(target_weights);
  potentials.g.array() -= shift;
  potentials.f.array() += shift;
}

Backend parse_backend(std::string_view name) {
  if (name == "exact") return Backend::kExact;
  if (name == "entropic") return Backend::kEntropic;
  throw InputError("unknown backend '" + std::string(name) + "' (expected exact|entropic)");
}

std::string_view backend_name(Backend backend) {
  return backend == Backend::kExact ? "exact" : "entropic";
}

OtSolution solve(const CostMatrix& cost, const Vector& a, const Vector& b,
                 const SolverConfig& config) {
  if (config.backend == Backend::kEntropic) {
    return solve_entropic(cost, a, b, config.epsilon, config.sinkhorn);
  }
  return solve_exact(cost, a, b, config.simplex);
}

OtSolution wasserstein(const DiscreteMeasure& p, const DiscreteMeasure& q,
                       const SolverConfig& config) {
  p.validate();
  q.validate();
  if (p.dim() != q.dim()) {
    throw InputError("wasserstein: dimension mismatch (" + std::to_string(p.dim()) + " vs " +
                     std::to_string(q.dim()) + ")");
  }
  return solve(cost_matrix(p.support, q.support, config.power), p.weights, q.weights, config);
}

double wasserstein_1d_sorted(const DiscreteMeasure& p, const DiscreteMeasure& q, double power) {
  p.validate();
  q.validate();
  if (p.dim() != 1 || q.dim() != 1 || p.size() != q.size()) {
    throw InputError("wasserstein_1d_sorted: needs 1-D measures of equal size");
  }
  const Index n = p.size();
  const double w = 1.0 / static_cast<double>(n);
  for (Index i = 0; i < n; ++i) {
    if (std::abs(p.weights[i] - w) > kWeightSumTolerance ||
        std::abs(q.weights[i] - w) > kWeightSumTolerance) {
      throw InputError("wasserstein_1d_sorted: needs uniform weights");
    }
  }
  std::vector<double> x(p.support.data(), p.support.data() + n);
  std::vector<double> y(q.support.data(), q.support.data() + n);
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  double cost = 0.0;
  for (Index i = 0; i < n; ++i) cost += std::pow(std::abs(x[i] - y[i]), power);
  return std::pow(cost * w, 1.0 / power);
}

}  // namespace otval
