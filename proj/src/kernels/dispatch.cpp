#include <algorithm>
#include <atomic>
#include <cassert>
#include <cstdlib>
#include <string>

#include "kernels_internal.hpp"

namespace dipt::kernels {
namespace {

bool cpu_has(Backend backend) {
  switch (backend) {
    case Backend::scalar:
      return true;
    case Backend::avx2:
#if DIPT_KERNELS_X86 && (defined(__GNUC__) || defined(__clang__))
      __builtin_cpu_init();
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Backend::neon:
      return DIPT_KERNELS_ARM64 != 0;
  }
  return false;
}

const KernelTable* initial_table() {
  if (const char* env = std::getenv("DIPT_KERNELS")) {
    const std::string want(env);
    for (Backend b : {Backend::scalar, Backend::avx2, Backend::neon}) {
      if (want == backend_name(b)) {
        if (const KernelTable* t = table_for(b)) return t;
      }
    }
  }
  if (const KernelTable* t = table_for(Backend::avx2)) return t;
  if (const KernelTable* t = table_for(Backend::neon)) return t;
  return &scalar_table();
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> table{initial_table()};
  return table;
}

}  // namespace

const KernelTable* table_for(Backend backend) {
  if (!cpu_has(backend)) return nullptr;
  switch (backend) {
    case Backend::scalar:
      return &scalar_table();
    case Backend::avx2:
#if DIPT_KERNELS_X86
      return &detail::avx2_table();
#else
      return nullptr;
#endif
    case Backend::neon:
#if DIPT_KERNELS_ARM64
      return &detail::neon_table();
#else
      return nullptr;
#endif
  }
  return nullptr;
}

bool backend_available(Backend backend) { return table_for(backend) != nullptr; }

std::vector<Backend> available_backends() {
  std::vector<Backend> out;
  for (Backend b : {Backend::scalar, Backend::avx2, Backend::neon}) {
    if (backend_available(b)) out.push_back(b);
  }
  return out;
}

const KernelTable& active() { return *current().load(std::memory_order_acquire); }

Backend active_backend() { return active().backend; }

bool set_backend(Backend backend) {
  const KernelTable* t = table_for(backend);
  if (t == nullptr) return false;
  current().store(t, std::memory_order_release);
  return true;
}

std::string_view backend_name(Backend backend) {
  switch (backend) {
    case Backend::scalar:
      return "scalar";
    case Backend::avx2:
      return "avx2";
    case Backend::neon:
      return "neon";
  }
  return "unknown";
}

double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  return active().dot(a.data(), b.data(), a.size());
}

double weighted_dot(std::span<const double> a, std::span<const double> w,
                    std::span<const double> b) {
  assert(a.size() == w.size() && a.size() == b.size());
  return active().weighted_dot(a.data(), w.data(), b.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  active().axpy(alpha, x.data(), y.data(), x.size());
}

double sum(std::span<const double> a) { return active().sum(a.data(), a.size()); }

void gemv_colmajor(std::span<const double> x, std::size_t rows, std::size_t cols,
                   std::span<const double> beta, std::span<double> out) {
  assert(x.size() == rows * cols && beta.size() == cols && out.size() == rows);
  const KernelTable& k = active();
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t j = 0; j < cols; ++j) {
    if (beta[j] == 0.0) continue;
    k.axpy(beta[j], x.data() + j * rows, out.data(), rows);
  }
}

void weighted_gram(std::span<const double> x, std::size_t rows, std::size_t cols,
                   std::span<const double> w, std::span<double> out) {
  assert(x.size() == rows * cols && w.size() == rows && out.size() == cols * cols);
  const KernelTable& k = active();
  for (std::size_t j = 0; j < cols; ++j) {
    const double* xj = x.data() + j * rows;
    for (std::size_t l = j; l < cols; ++l) {
      const double v = k.weighted_dot(xj, w.data(), x.data() + l * rows, rows);
      out[j * cols + l] = v;
      out[l * cols + j] = v;
    }
  }
}

void weighted_xt_vec(std::span<const double> x, std::size_t rows, std::size_t cols,
                     std::span<const double> w, std::span<const double> r,
                     std::span<double> out) {
  assert(x.size() == rows * cols && w.size() == rows && r.size() == rows &&
         out.size() == cols);
  const KernelTable& k = active();
  for (std::size_t j = 0; j < cols; ++j) {
    out[j] = k.weighted_dot(x.data() + j * rows, w.data(), r.data(), rows);
  }
}

}  // namespace dipt::kernels
