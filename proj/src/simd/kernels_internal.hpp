#pragma once

#include "bsid/simd/kernels.hpp"

namespace bsid::simd::detail {

// Defined in kernels_avx2.cpp, which is compiled with -mavx2 -mfma. Calling
// any of its entries is only legal after a CPUID check.
extern const KernelTable avx2_table;

} // namespace bsid::simd::detail
