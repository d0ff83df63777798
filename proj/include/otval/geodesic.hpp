#pragma once

#include <vector>

#include "otval/measure.hpp"
#include "otval/ot/wasserstein.hpp"

namespace otval {

struct InterpolationParams {
  double t = 0.5;
  Index support_size = 100;  ///< S: atoms in shared measures

  void validate() const;
};

/// W(P, Q) against W(P, gamma) + W(gamma, Q).
struct GeodesicCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double gap = 0.0;  ///< rhs - lhs
};

/// Row i = (sum_j pi_ij z_j) / a_i. Throws InputError on a zero-mass row or
/// when the plan's column count differs from z.rows().
Matrix barycentric_projection(const TransportPlan& plan, const Matrix& z);

/// Displacement interpolation: atom i of P moves to
/// (1 - t) x_i + t * proj(x_i), where proj is the barycentric projection
/// under an optimal plan from P to Q. Weights are copied from P.
DiscreteMeasure interpolate(const DiscreteMeasure& p, const DiscreteMeasure& q, double t,
                            const SolverConfig& config = {});

/// Same as above, reusing an already solved plan from P to Q.
DiscreteMeasure interpolate_with_plan(const DiscreteMeasure& p, const DiscreteMeasure& q,
                                      const TransportPlan& plan, double t);

GeodesicCheck geodesic_gap(const DiscreteMeasure& p, const DiscreteMeasure& q,
                           const DiscreteMeasure& gamma, const SolverConfig& config = {});

/// interpolate(eta_p, eta_q, 0.5).
DiscreteMeasure geodesic_midpoint(const DiscreteMeasure& eta_p, const DiscreteMeasure& eta_q,
                                  const SolverConfig& config = {});

/// One free-support fixed-point step: q_j <- sum_i lambda_i proj_i(q_j), with
/// proj_i the barycentric projection of Q onto measures[i]. Weights of Q are
/// kept. Requires lambda >= 0 summing to one.
Matrix barycenter_step(const DiscreteMeasure& q, const std::vector<DiscreteMeasure>& measures,
                       const std::vector<double>& lambda, const SolverConfig& config = {});

}  // namespace otval
