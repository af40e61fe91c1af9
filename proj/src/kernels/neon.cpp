#include "kernels_internal.hpp"

#if DIPT_KERNELS_ARM64
#include <arm_neon.h>

namespace dipt::kernels::detail {
namespace {

double dot_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
  }
  double res = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) res += a[i] * b[i];
  return res;
}

double weighted_dot_neon(const double* a, const double* w, const double* b,
                         std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vmulq_f64(vld1q_f64(a + i), vld1q_f64(w + i)),
                     vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, vmulq_f64(vld1q_f64(a + i + 2), vld1q_f64(w + i + 2)),
                     vld1q_f64(b + i + 2));
  }
  double res = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) res += a[i] * w[i] * b[i];
  return res;
}

void axpy_neon(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

double sum_neon(const double* a, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vaddq_f64(acc0, vld1q_f64(a + i));
    acc1 = vaddq_f64(acc1, vld1q_f64(a + i + 2));
  }
  double res = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) res += a[i];
  return res;
}

}  // namespace

const KernelTable& neon_table() {
  static const KernelTable table{Backend::neon,     "neon",
                                 &dot_neon,         &weighted_dot_neon,
                                 &axpy_neon,        &sum_neon};
  return table;
}

}  // namespace dipt::kernels::detail

#endif
