#pragma once

#include <cstdint>

#include "otval/ot/cost.hpp"
#include "otval/ot/solution.hpp"

namespace otval {

enum class PivotRule {
  kBlockSearch,  ///< scan arcs in blocks of ~sqrt(#arcs), take the best of the first improving block
  kBland,        ///< lowest-index improving arc
};

struct SimplexOptions {
  PivotRule rule = PivotRule::kBlockSearch;
  std::int64_t max_pivots = 100'000'000;
};

/// Exact discrete OT by the bipartite network simplex over a strongly
/// feasible spanning tree. The plan is a basic solution (at most n + m - 1
/// positive entries) and the potentials are the tree duals, recomputed from
/// the final basis.
///
/// Throws InputError when a or b are not probability vectors matching C, and
/// SolverError when the pivot budget is exhausted.
OtSolution solve_exact(const CostMatrix& cost, const Vector& a, const Vector& b,
                       const SimplexOptions& options = {});

/// Pivot count of the most recent solve_exact on this thread (diagnostics).
std::int64_t last_pivot_count();

}  // namespace otval
