#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "otval/ot/wasserstein.hpp"
#include "otval/types.hpp"

namespace otval::fed {

enum class Mode {
  kFixedValidation,  ///< server holds a validation set Q, constant across rounds
  kBarycenter,       ///< server learns Q as the barycenter of the client gammas
};

Mode parse_mode(std::string_view name);
std::string_view mode_name(Mode mode);

struct FedConfig {
  Index num_clients = 1;     ///< N
  int rounds = 10;           ///< K
  Index support_size = 100;  ///< S, atoms per gamma (and per Q in barycenter mode)
  double t = 0.5;
  SolverConfig solver;       ///< power p lives here
  std::vector<double> lambda;  ///< barycenter weights; empty means uniform
  Mode mode = Mode::kFixedValidation;
  /// Early stop once |A(k) - A(k-1)| / A(k-1) stays below this for 3
  /// consecutive rounds; 0 disables.
  double stop_tolerance = 1e-6;
  std::uint64_t seed = 0;
  /// Scale of the random initial supports; 0 derives it from the parties'
  /// RMS coordinate, rounded up to a power of two.
  double range_hint = 0.0;
  bool parallel_clients = false;

  /// Throws InputError on any violated invariant.
  void validate() const;
  /// lambda, or uniform 1/N when unset.
  std::vector<double> weights() const;
};

inline constexpr int kStopPatience = 3;

}  // namespace otval::fed
