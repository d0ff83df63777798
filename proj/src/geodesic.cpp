#include "otval/geodesic.hpp"

#include <cmath>
#include <string>

#include "otval/error.hpp"

namespace otval {

void InterpolationParams::validate() const {
  if (!(t >= 0.0 && t <= 1.0)) throw InputError("interpolation t must lie in [0, 1]");
  if (support_size < 1) throw InputError("support size S must be at least 1");
}

Matrix barycentric_projection(const TransportPlan& plan, const Matrix& z) {
  const Matrix& pi = plan.coupling;
  if (pi.cols() != z.rows()) {
    throw InputError("barycentric_projection: plan has " + std::to_string(pi.cols()) +
                     " columns but target support has " + std::to_string(z.rows()) + " rows");
  }
  Matrix out = pi * z;
  for (Index i = 0; i < pi.rows(); ++i) {
    const double mass = plan.source_weights.size() == pi.rows() ? plan.source_weights[i]
                                                                 : pi.row(i).sum();
    if (!(mass > 0.0)) {
      throw InputError("barycentric_projection: source atom " + std::to_string(i) +
                       " carries no mass");
    }
    out.row(i) /= mass;
  }
  return out;
}

DiscreteMeasure interpolate_with_plan(const DiscreteMeasure& p, const DiscreteMeasure& q,
                                      const TransportPlan& plan, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw InputError("interpolate: t must lie in [0, 1]");
  DiscreteMeasure out;
  out.weights = p.weights;
  if (t == 0.0) {
    out.support = p.support;
    return out;
  }
  const Matrix proj = barycentric_projection(plan, q.support);
  out.support = t == 1.0 ? proj : Matrix((1.0 - t) * p.support + t * proj);
  return out;
}

DiscreteMeasure interpolate(const DiscreteMeasure& p, const DiscreteMeasure& q, double t,
                            const SolverConfig& config) {
  if (!(t >= 0.0 && t <= 1.0)) throw InputError("interpolate: t must lie in [0, 1]");
  if (t == 0.0) {
    p.validate();
    return p;
  }
  const OtSolution sol = wasserstein(p, q, config);
  return interpolate_with_plan(p, q, sol.plan, t);
}

GeodesicCheck geodesic_gap(const DiscreteMeasure& p, const DiscreteMeasure& q,
                           const DiscreteMeasure& gamma, const SolverConfig& config) {
  GeodesicCheck check;
  check.lhs = wasserstein(p, q, config).distance;
  check.rhs = wasserstein(p, gamma, config).distance + wasserstein(gamma, q, config).distance;
  check.gap = check.rhs - check.lhs;
  return check;
}

DiscreteMeasure geodesic_midpoint(const DiscreteMeasure& eta_p, const DiscreteMeasure& eta_q,
                                  const SolverConfig& config) {
  return interpolate(eta_p, eta_q, 0.5, config);
}

Matrix barycenter_step(const DiscreteMeasure& q, const std::vector<DiscreteMeasure>& measures,
                       const std::vector<double>& lambda, const SolverConfig& config) {
  if (measures.empty()) throw InputError("barycenter_step: no measures");
  if (lambda.size() != measures.size()) {
    throw InputError("barycenter_step: need one weight per measure");
  }
  double total = 0.0;
  for (double l : lambda) {
    if (!(l >= 0.0)) throw InputError("barycenter_step: weights must be nonnegative");
    total += l;
  }
  if (std::abs(total - 1.0) > kWeightSumTolerance) {
    throw InputError("barycenter_step: weights must sum to one");
  }
  Matrix next = Matrix::Zero(q.size(), q.dim());
  for (std::size_t i = 0; i < measures.size(); ++i) {
    if (lambda[i] == 0.0) continue;
    const OtSolution sol = wasserstein(q, measures[i], config);
    next += lambda[i] * barycentric_projection(sol.plan, measures[i].support);
  }
  return next;
}

}  // namespace otval
