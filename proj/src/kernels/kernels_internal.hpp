#pragma once

#include "dipt/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#define DIPT_KERNELS_X86 1
#else
#define DIPT_KERNELS_X86 0
#endif

#if defined(__aarch64__) || defined(_M_ARM64)
#define DIPT_KERNELS_ARM64 1
#else
#define DIPT_KERNELS_ARM64 0
#endif

namespace dipt::kernels::detail {

#if DIPT_KERNELS_X86
const KernelTable& avx2_table();
#endif
#if DIPT_KERNELS_ARM64
const KernelTable& neon_table();
#endif

}  // namespace dipt::kernels::detail
