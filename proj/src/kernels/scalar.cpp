#include "kernels_internal.hpp"

namespace dipt::kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double weighted_dot_scalar(const double* a, const double* w, const double* b,
                           std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * w[i] * b[i];
  return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double sum_scalar(const double* a, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i];
  return acc;
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{Backend::scalar,     "scalar",
                                 &dot_scalar,         &weighted_dot_scalar,
                                 &axpy_scalar,        &sum_scalar};
  return table;
}

}  // namespace dipt::kernels
