#include <atomic>
#include <string>

#include "otval/error.hpp"
#include "otval/simd/kernels.hpp"

namespace otval::simd {
namespace {

struct KernelTable {
  decltype(&scalar::pairwise_sqdist) pairwise_sqdist;
  decltype(&scalar::argmin_reduced_cost) argmin_reduced_cost;
  decltype(&scalar::scaled_logsumexp) scaled_logsumexp;
};

constexpr KernelTable kScalarTable{scalar::pairwise_sqdist, scalar::argmin_reduced_cost,
                                   scalar::scaled_logsumexp};
#if defined(OTVAL_HAVE_AVX2)
constexpr KernelTable kAvx2Table{avx2::pairwise_sqdist, avx2::argmin_reduced_cost,
                                 avx2::scaled_logsumexp};
#endif

const KernelTable* table_for(Level level) {
#if defined(OTVAL_HAVE_AVX2)
  if (level == Level::kAvx2) return &kAvx2Table;
#endif
  (void)level;
  return &kScalarTable;
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> table{table_for(detect_level())};
  return table;
}

std::atomic<Level>& current_level() {
  static std::atomic<Level> level{detect_level()};
  return level;
}

}  // namespace

bool level_supported(Level level) {
  switch (level) {
    case Level::kScalar:
      return true;
    case Level::kAvx2:
#if defined(OTVAL_HAVE_AVX2)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
  }
  return false;
}

Level detect_level() { return level_supported(Level::kAvx2) ? Level::kAvx2 : Level::kScalar; }

Level active_level() { return current_level().load(std::memory_order_relaxed); }

void set_level(Level level) {
  if (!level_supported(level)) {
    throw InputError("SIMD level '" + std::string(level_name(level)) +
                     "' is not supported by this build or CPU");
  }
  current_level().store(level, std::memory_order_relaxed);
  current().store(table_for(level), std::memory_order_relaxed);
}

std::string_view level_name(Level level) {
  switch (level) {
    case Level::kScalar:
      return "scalar";
    case Level::kAvx2:
      return "avx2";
  }
  return "unknown";
}

Level parse_level(std::string_view name) {
  if (name == "scalar") return Level::kScalar;
  if (name == "avx2") return Level::kAvx2;
  if (name == "auto") return detect_level();
  throw InputError("unknown SIMD level '" + std::string(name) + "' (expected auto|scalar|avx2)");
}

void pairwise_sqdist(const double* x, std::size_t n, const double* yt, std::size_t m,
                     std::size_t d, double* out) {
  current().load(std::memory_order_relaxed)->pairwise_sqdist(x, n, yt, m, d, out);
}

ArgMin argmin_reduced_cost(const double* cost, const std::int8_t* state, double pi_src,
                           const double* pi_tgt, std::size_t len) {
  return current().load(std::memory_order_relaxed)
      ->argmin_reduced_cost(cost, state, pi_src, pi_tgt, len);
}

double scaled_logsumexp(const double* c, const double* h, double inv_eps, std::size_t len) {
  return current().load(std::memory_order_relaxed)->scaled_logsumexp(c, h, inv_eps, len);
}

}  // namespace otval::simd
