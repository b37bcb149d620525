#pragma once

// Hot inner loops of the project, each available as a portable scalar
// reference and (on x86-64) an AVX2/FMA variant. The variant is chosen once at
// runtime from CPUID; setting BSID_SIMD=scalar in the environment forces the
// reference path. Every variant must agree with the scalar one: exactly for
// the elementwise kernels, to within float rounding for gemm.

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace bsid::simd {

enum class Trans : std::uint8_t { No, Yes };

/// Bias-corrected Adam coefficients for one step; all single precision so the
/// scalar and vector paths evaluate the same expression tree.
struct AdamCoefficients {
    float beta1;
    float one_minus_beta1;
    float beta2;
    float one_minus_beta2;
    float bias_correction1;  // 1 - beta1^t
    float bias_correction2;  // 1 - beta2^t
    float learning_rate;
    float epsilon;
};

struct KernelTable {
    const char* name;

    /// C[m x n] (+)= A[m x k] * B[k x n], all row-major with leading dimensions.
    void (*gemm_nn)(std::size_t m, std::size_t n, std::size_t k, const float* a, std::size_t lda, const float* b,
                    std::size_t ldb, float* c, std::size_t ldc, bool accumulate);

    void (*relu_forward)(const float* x, float* y, std::size_t n);

    /// dx[i] = y[i] > 0 ? dy[i] : 0, where y is the forward output.
    void (*relu_backward)(const float* y, const float* dy, float* dx, std::size_t n);

    void (*adam_update)(float* param, float* m, float* v, const float* grad, std::size_t n,
                        const AdamCoefficients& coeff);

    /// out[i] = float(counts[i]) / float(max_count). Requires max_count > 0 and
    /// every count < 2^31.
    void (*normalize_counts)(const std::uint32_t* counts, float* out, std::size_t n, std::uint32_t max_count);
};

const KernelTable& scalar_kernels();

/// nullptr when the build has no AVX2 variant or the CPU lacks AVX2+FMA.
const KernelTable* avx2_kernels();

/// The table used by the library. Resolved on first use.
const KernelTable& active();

/// Overrides the active table (tests and benchmarks).
void set_active(const KernelTable& table);

/// General matrix multiply with optional transposition of either operand,
/// built on the table's gemm_nn. When ta == Yes, A is stored k x m; when
/// tb == Yes, B is stored n x k.
void gemm(const KernelTable& table, Trans ta, Trans tb, std::size_t m, std::size_t n, std::size_t k, const float* a,
          std::size_t lda, const float* b, std::size_t ldb, float* c, std::size_t ldc, bool accumulate);

inline void gemm(Trans ta, Trans tb, std::size_t m, std::size_t n, std::size_t k, const float* a, std::size_t lda,
                 const float* b, std::size_t ldb, float* c, std::size_t ldc, bool accumulate) {
    gemm(active(), ta, tb, m, n, k, a, lda, b, ldb, c, ldc, accumulate);
}

} // namespace bsid::simd
