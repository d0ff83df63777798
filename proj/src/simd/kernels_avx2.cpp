// Compiled with -mavx2 only; never call these without checking the CPU first.
// FMA is deliberately not enabled so that products and sums round exactly as
// in the scalar reference.

#include <immintrin.h>

#include <cmath>
#include <cstring>
#include <limits>

#include "otval/simd/kernels.hpp"

namespace otval::simd::avx2 {
namespace {

// Cephes-style exp on 4 lanes. Inputs below -708.39 flush to zero, inputs
// above 709 saturate; in between the result matches std::exp to a few ulp.
inline __m256d exp_pd(__m256d x) {
  const __m256d lo = _mm256_set1_pd(-708.39641853226410622);
  const __m256d hi = _mm256_set1_pd(709.0);
  const __m256d underflow = _mm256_cmp_pd(x, lo, _CMP_LT_OQ);
  const __m256d overflow = _mm256_cmp_pd(x, hi, _CMP_GT_OQ);
  x = _mm256_max_pd(_mm256_min_pd(x, hi), lo);

  const __m256d n = _mm256_round_pd(_mm256_mul_pd(x, _mm256_set1_pd(1.4426950408889634073599)),
                                    _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_sub_pd(x, _mm256_mul_pd(n, _mm256_set1_pd(6.93145751953125E-1)));
  r = _mm256_sub_pd(r, _mm256_mul_pd(n, _mm256_set1_pd(1.42860682030941723212E-6)));

  const __m256d rr = _mm256_mul_pd(r, r);
  __m256d p = _mm256_set1_pd(1.26177193074810590878E-4);
  p = _mm256_add_pd(_mm256_mul_pd(p, rr), _mm256_set1_pd(3.02994407707441961300E-2));
  p = _mm256_add_pd(_mm256_mul_pd(p, rr), _mm256_set1_pd(9.99999999999999999910E-1));
  p = _mm256_mul_pd(p, r);
  __m256d q = _mm256_set1_pd(3.00198505138664455042E-6);
  q = _mm256_add_pd(_mm256_mul_pd(q, rr), _mm256_set1_pd(2.52448340349684104192E-3));
  q = _mm256_add_pd(_mm256_mul_pd(q, rr), _mm256_set1_pd(2.27265548208155028766E-1));
  q = _mm256_add_pd(_mm256_mul_pd(q, rr), _mm256_set1_pd(2.00000000000000000009E0));
  __m256d e = _mm256_div_pd(p, _mm256_sub_pd(q, p));
  e = _mm256_add_pd(_mm256_set1_pd(1.0), _mm256_add_pd(e, e));

  // 2^n through the exponent field; n is integral in [-1022, 1023].
  const __m256d magic = _mm256_set1_pd(6755399441055744.0);  // 1.5 * 2^52
  __m256i ni = _mm256_sub_epi64(_mm256_castpd_si256(_mm256_add_pd(n, magic)),
                                _mm256_castpd_si256(magic));
  ni = _mm256_slli_epi64(_mm256_add_epi64(ni, _mm256_set1_epi64x(1023)), 52);
  __m256d result = _mm256_mul_pd(e, _mm256_castsi256_pd(ni));

  result = _mm256_andnot_pd(underflow, result);
  result = _mm256_blendv_pd(result, _mm256_set1_pd(std::numeric_limits<double>::infinity()),
                            overflow);
  return result;
}

inline double hsum(__m256d v) {
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, v);
  return (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
}

inline double hmax(__m256d v) {
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, v);
  double m = lanes[0];
  for (int l = 1; l < 4; ++l) m = lanes[l] > m ? lanes[l] : m;
  return m;
}

}  // namespace

void pairwise_sqdist(const double* x, std::size_t n, const double* yt, std::size_t m,
                     std::size_t d, double* out) {
  const std::size_t m4 = m & ~std::size_t{3};
  for (std::size_t i = 0; i < n; ++i) {
    const double* xi = x + i * d;
    double* row = out + i * m;
    std::size_t j = 0;
    for (; j < m4; j += 4) {
      __m256d acc = _mm256_setzero_pd();
      for (std::size_t k = 0; k < d; ++k) {
        const __m256d diff =
            _mm256_sub_pd(_mm256_loadu_pd(yt + k * m + j), _mm256_set1_pd(xi[k]));
        acc = _mm256_add_pd(acc, _mm256_mul_pd(diff, diff));
      }
      _mm256_storeu_pd(row + j, acc);
    }
    for (; j < m; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        const double diff = yt[k * m + j] - xi[k];
        acc = acc + diff * diff;
      }
      row[j] = acc;
    }
  }
}

ArgMin argmin_reduced_cost(const double* cost, const std::int8_t* state, double pi_src,
                           const double* pi_tgt, std::size_t len) {
  const double inf = std::numeric_limits<double>::infinity();
  const std::size_t len4 = len & ~std::size_t{3};
  ArgMin best{inf, 0};
  if (len4 > 0) {
    const __m256d src = _mm256_set1_pd(pi_src);
    __m256d minv = _mm256_set1_pd(inf);
    __m256d mini = _mm256_setzero_pd();
    __m256d idx = _mm256_setr_pd(0.0, 1.0, 2.0, 3.0);
    const __m256d four = _mm256_set1_pd(4.0);
    for (std::size_t j = 0; j < len4; j += 4) {
      std::int32_t packed;
      std::memcpy(&packed, state + j, sizeof(packed));
      const __m256d s = _mm256_cvtepi32_pd(_mm_cvtepi8_epi32(_mm_cvtsi32_si128(packed)));
      const __m256d red = _mm256_sub_pd(_mm256_add_pd(_mm256_loadu_pd(cost + j), src),
                                        _mm256_loadu_pd(pi_tgt + j));
      const __m256d c = _mm256_mul_pd(s, red);
      const __m256d lt = _mm256_cmp_pd(c, minv, _CMP_LT_OQ);
      minv = _mm256_blendv_pd(minv, c, lt);
      mini = _mm256_blendv_pd(mini, idx, lt);
      idx = _mm256_add_pd(idx, four);
    }
    alignas(32) double vals[4];
    alignas(32) double inds[4];
    _mm256_store_pd(vals, minv);
    _mm256_store_pd(inds, mini);
    for (int l = 0; l < 4; ++l) {
      const auto li = static_cast<std::size_t>(inds[l]);
      if (vals[l] < best.value || (vals[l] == best.value && li < best.index)) {
        best.value = vals[l];
        best.index = li;
      }
    }
  }
  for (std::size_t j = len4; j < len; ++j) {
    const double c = static_cast<double>(state[j]) * ((cost[j] + pi_src) - pi_tgt[j]);
    if (c < best.value) {
      best.value = c;
      best.index = j;
    }
  }
  return best;
}

double scaled_logsumexp(const double* c, const double* h, double inv_eps, std::size_t len) {
  const std::size_t len4 = len & ~std::size_t{3};
  const __m256d ie = _mm256_set1_pd(inv_eps);
  double mx = -std::numeric_limits<double>::infinity();
  if (len4 > 0) {
    __m256d vmax = _mm256_set1_pd(mx);
    for (std::size_t j = 0; j < len4; j += 4) {
      const __m256d v =
          _mm256_sub_pd(_mm256_loadu_pd(h + j), _mm256_mul_pd(_mm256_loadu_pd(c + j), ie));
      vmax = _mm256_max_pd(vmax, v);
    }
    mx = hmax(vmax);
  }
  for (std::size_t j = len4; j < len; ++j) {
    const double v = h[j] - c[j] * inv_eps;
    if (v > mx) mx = v;
  }
  if (!std::isfinite(mx)) return mx;

  double sum = 0.0;
  if (len4 > 0) {
    const __m256d vm = _mm256_set1_pd(mx);
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t j = 0; j < len4; j += 4) {
      const __m256d v =
          _mm256_sub_pd(_mm256_loadu_pd(h + j), _mm256_mul_pd(_mm256_loadu_pd(c + j), ie));
      acc = _mm256_add_pd(acc, exp_pd(_mm256_sub_pd(v, vm)));
    }
    sum = hsum(acc);
  }
  for (std::size_t j = len4; j < len; ++j) {
    sum += std::exp((h[j] - c[j] * inv_eps) - mx);
  }
  return mx + std::log(sum);
}

void exp_inplace(double* v, std::size_t len) {
  const std::size_t len4 = len & ~std::size_t{3};
  for (std::size_t j = 0; j < len4; j += 4) {
    _mm256_storeu_pd(v + j, exp_pd(_mm256_loadu_pd(v + j)));
  }
  for (std::size_t j = len4; j < len; ++j) v[j] = std::exp(v[j]);
}

}  // namespace otval::simd::avx2
