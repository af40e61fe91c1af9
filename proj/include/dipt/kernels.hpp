#pragma once

// Vector kernels used by the model-fitting inner loops.
//
// Every kernel has a scalar reference implementation. Wider variants (AVX2+FMA
// on x86-64, NEON on AArch64) are compiled into separate translation units and
// picked at runtime from the CPU's capabilities. The environment variable
// DIPT_KERNELS=scalar|avx2|neon overrides the choice when that backend is
// available. Results from different backends agree to rounding, not bit for
// bit; a given backend is deterministic.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace dipt::kernels {

enum class Backend { scalar, avx2, neon };

struct KernelTable {
  Backend backend;
  const char* name;
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*weighted_dot)(const double* a, const double* w, const double* b,
                         std::size_t n);
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  double (*sum)(const double* a, std::size_t n);
};

const KernelTable& scalar_table();
// nullptr when the backend was not compiled in or the CPU lacks it.
const KernelTable* table_for(Backend backend);
bool backend_available(Backend backend);
std::vector<Backend> available_backends();

const KernelTable& active();
Backend active_backend();
// Returns false (and leaves the selection alone) when unavailable.
bool set_backend(Backend backend);
std::string_view backend_name(Backend backend);

// Convenience wrappers over the active table.
double dot(std::span<const double> a, std::span<const double> b);
double weighted_dot(std::span<const double> a, std::span<const double> w,
                    std::span<const double> b);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
double sum(std::span<const double> a);

// out = X * beta for column-major X (rows x cols).
void gemv_colmajor(std::span<const double> x, std::size_t rows,
                   std::size_t cols, std::span<const double> beta,
                   std::span<double> out);

// Upper and lower triangles of X' diag(w) X, written column-major into
// out (cols x cols).
void weighted_gram(std::span<const double> x, std::size_t rows,
                   std::size_t cols, std::span<const double> w,
                   std::span<double> out);

// out_j = sum_i x_ij w_i r_i
void weighted_xt_vec(std::span<const double> x, std::size_t rows,
                     std::size_t cols, std::span<const double> w,
                     std::span<const double> r, std::span<double> out);

}  // namespace dipt::kernels
