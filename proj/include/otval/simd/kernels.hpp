#pragma once

// Data-parallel inner loops shared by the solvers. Every kernel has a scalar
// reference implementation and, on x86-64, an AVX2 variant; the active one is
// chosen once at startup from CPUID and may be overridden (tests, CLI --simd).
// Variants are equivalence-tested against the scalar reference.

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace otval::simd {

enum class Level { kScalar, kAvx2 };

/// Index and value of the first minimum in a range.
struct ArgMin {
  double value;
  std::size_t index;
};

namespace scalar {

/// out[i*m + j] = sum_k (x[i*d + k] - yt[k*m + j])^2 for i < n, j < m.
/// `x` is n x d row-major, `yt` is the target point set transposed (d x m).
void pairwise_sqdist(const double* x, std::size_t n, const double* yt, std::size_t m,
                     std::size_t d, double* out);

/// First minimum over j < len of state[j] * (cost[j] + pi_src - pi_tgt[j]).
ArgMin argmin_reduced_cost(const double* cost, const std::int8_t* state, double pi_src,
                           const double* pi_tgt, std::size_t len);

/// log sum_j exp(h[j] - c[j] * inv_eps). Requires len >= 1 and at least one
/// finite term; entries of h may be -inf.
double scaled_logsumexp(const double* c, const double* h, double inv_eps, std::size_t len);

/// Elementwise exp, used to check the vectorised exponential.
void exp_inplace(double* v, std::size_t len);

}  // namespace scalar

#if defined(OTVAL_HAVE_AVX2)
namespace avx2 {
void pairwise_sqdist(const double* x, std::size_t n, const double* yt, std::size_t m,
                     std::size_t d, double* out);
ArgMin argmin_reduced_cost(const double* cost, const std::int8_t* state, double pi_src,
                           const double* pi_tgt, std::size_t len);
double scaled_logsumexp(const double* c, const double* h, double inv_eps, std::size_t len);
void exp_inplace(double* v, std::size_t len);
}  // namespace avx2
#endif

/// Best level supported by both the build and the running CPU.
Level detect_level();
bool level_supported(Level level);

/// Currently dispatched level.
Level active_level();

/// Forces a level; throws InputError when the level is unsupported here.
void set_level(Level level);

std::string_view level_name(Level level);
/// Parses "scalar", "avx2" or "auto" (auto = detect_level()).
Level parse_level(std::string_view name);

// Dispatched entry points.
void pairwise_sqdist(const double* x, std::size_t n, const double* yt, std::size_t m,
                     std::size_t d, double* out);
ArgMin argmin_reduced_cost(const double* cost, const std::int8_t* state, double pi_src,
                           const double* pi_tgt, std::size_t len);
double scaled_logsumexp(const double* c, const double* h, double inv_eps, std::size_t len);

}  // namespace otval::simd
