// Compiled with -mavx2 -mfma. Nothing in here may run before the dispatcher
// has confirmed CPU support.

#include "kernels_internal.hpp"

#if DIPT_KERNELS_X86
#include <immintrin.h>

namespace dipt::kernels::detail {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  const __m128d swapped = _mm_unpackhi_pd(s, s);
  return _mm_cvtsd_f64(_mm_add_sd(s, swapped));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4),
                           _mm256_loadu_pd(b + i + 4), acc1);
  }
  if (i + 4 <= n) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    i += 4;
  }
  double res = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) res += a[i] * b[i];
  return res;
}

double weighted_dot_avx2(const double* a, const double* w, const double* b,
                         std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256d aw0 = _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(w + i));
    const __m256d aw1 =
        _mm256_mul_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(w + i + 4));
    acc0 = _mm256_fmadd_pd(aw0, _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(aw1, _mm256_loadu_pd(b + i + 4), acc1);
  }
  if (i + 4 <= n) {
    const __m256d aw = _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(w + i));
    acc0 = _mm256_fmadd_pd(aw, _mm256_loadu_pd(b + i), acc0);
    i += 4;
  }
  double res = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) res += a[i] * w[i] * b[i];
  return res;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
    _mm256_storeu_pd(y + i, vy);
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

double sum_avx2(const double* a, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(a + i));
    acc1 = _mm256_add_pd(acc1, _mm256_loadu_pd(a + i + 4));
  }
  if (i + 4 <= n) {
    acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(a + i));
    i += 4;
  }
  double res = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) res += a[i];
  return res;
}

}  // namespace

const KernelTable& avx2_table() {
  static const KernelTable table{Backend::avx2,     "avx2",
                                 &dot_avx2,         &weighted_dot_avx2,
                                 &axpy_avx2,        &sum_avx2};
  return table;
}

}  // namespace dipt::kernels::detail

#endif
