#pragma once

#include "otval/ot/cost.hpp"
#include "otval/ot/solution.hpp"

namespace otval {

struct SinkhornOptions {
  int max_sweeps = 10'000;
  double marginal_tolerance = 1e-8;
  int check_every = 10;
};

/// Entropy-regularised OT with log-domain Sinkhorn updates. The returned plan
/// is rounded onto the exact marginals; transport_cost is <rounded plan, C>.
///
/// Throws InputError for epsilon <= 0 or bad weights, and SolverError when the
/// iterates stop being finite (epsilon too small for the cost scale).
OtSolution solve_entropic(const CostMatrix& cost, const Vector& a, const Vector& b,
                          double epsilon, const SinkhornOptions& options = {});

}  // namespace otval
