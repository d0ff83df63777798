#pragma once

#include "otval/types.hpp"

namespace otval {

/// Coupling with marginals `source_weights` (rows) and `target_weights` (cols).
struct TransportPlan {
  Matrix coupling;
  Vector source_weights;
  Vector target_weights;
};

/// Kantorovich potentials: f on the source atoms, g on the target atoms, in
/// cost units. Returned with sum_j b_j g_j = 0.
struct DualPotentials {
  Vector f;
  Vector g;
};

struct OtSolution {
  TransportPlan plan;
  DualPotentials potentials;
  double transport_cost = 0.0;  ///< <plan, C>
  double distance = 0.0;        ///< transport_cost^(1/p)
};

/// Shifts (f, g) -> (f + c, g - c) so that the b-weighted mean of g is zero.
void normalize_potentials(DualPotentials& potentials, const Vector& target_weights);

}  // namespace otval
