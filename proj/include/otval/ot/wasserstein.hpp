#pragma once

#include <string_view>

#include "otval/measure.hpp"
#include "otval/ot/cost.hpp"
#include "otval/ot/network_simplex.hpp"
#include "otval/ot/sinkhorn.hpp"
#include "otval/ot/solution.hpp"

namespace otval {

enum class Backend { kExact, kEntropic };

struct SolverConfig {
  Backend backend = Backend::kExact;
  double power = 2.0;
  double epsilon = 0.01;  ///< entropic backend only
  SimplexOptions simplex;
  SinkhornOptions sinkhorn;
};

Backend parse_backend(std::string_view name);
std::string_view backend_name(Backend backend);

/// Dispatches to solve_exact or solve_entropic.
OtSolution solve(const CostMatrix& cost, const Vector& a, const Vector& b,
                 const SolverConfig& config);

/// W_p(P, Q) with the Euclidean ground metric; p is taken from `config`.
OtSolution wasserstein(const DiscreteMeasure& p, const DiscreteMeasure& q,
                       const SolverConfig& config = {});

/// Closed-form W_p for one-dimensional, uniform, equal-size measures by
/// matching sorted atoms. Throws InputError outside that scope.
double wasserstein_1d_sorted(const DiscreteMeasure& p, const DiscreteMeasure& q,
                             double power = 2.0);

}  // namespace otval
