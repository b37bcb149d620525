// AVX2/FMA variants. This translation unit is built with -mavx2 -mfma, so it
// must not instantiate any inline or template code shared with the rest of the
// program (the linker could pick the AVX2 copy). Only intrinsics, raw pointers
// and functions with internal linkage appear here.

#include <immintrin.h>

#include "kernels_internal.hpp"

namespace bsid::simd {
namespace {

constexpr std::size_t kRows = 6;

alignas(32) const int kMaskTable[16] = {-1, -1, -1, -1, -1, -1, -1, -1, 0, 0, 0, 0, 0, 0, 0, 0};

inline __m256i tail_mask(std::size_t count) {
    return _mm256_loadu_si256(reinterpret_cast<const __m256i*>(kMaskTable + 8 - count));
}

// Computes a rows x (8 * vecs) block of C. With Masked, vecs must be 1 and only
// the first `width` columns are touched.
template <std::size_t Rows, std::size_t Vecs, bool Masked>
inline void micro_kernel(std::size_t k, const float* a, std::size_t lda, const float* b, std::size_t ldb, float* c,
                         std::size_t ldc, bool accumulate, std::size_t width) {
    __m256 acc[Rows][Vecs];
    const __m256i mask = Masked ? tail_mask(width) : _mm256_setzero_si256();
    for (std::size_t r = 0; r < Rows; ++r) {
        for (std::size_t v = 0; v < Vecs; ++v) {
            if (!accumulate) {
                acc[r][v] = _mm256_setzero_ps();
            } else if constexpr (Masked) {
                acc[r][v] = _mm256_maskload_ps(c + r * ldc, mask);
            } else {
                acc[r][v] = _mm256_loadu_ps(c + r * ldc + 8 * v);
            }
        }
    }
    for (std::size_t p = 0; p < k; ++p) {
        __m256 bv[Vecs];
        for (std::size_t v = 0; v < Vecs; ++v) {
            if constexpr (Masked) {
                bv[v] = _mm256_maskload_ps(b + p * ldb, mask);
            } else {
                bv[v] = _mm256_loadu_ps(b + p * ldb + 8 * v);
            }
        }
        for (std::size_t r = 0; r < Rows; ++r) {
            const __m256 av = _mm256_broadcast_ss(a + r * lda + p);
            for (std::size_t v = 0; v < Vecs; ++v) {
                acc[r][v] = _mm256_fmadd_ps(av, bv[v], acc[r][v]);
            }
        }
    }
    for (std::size_t r = 0; r < Rows; ++r) {
        for (std::size_t v = 0; v < Vecs; ++v) {
            if constexpr (Masked) {
                _mm256_maskstore_ps(c + r * ldc, mask, acc[r][v]);
            } else {
                _mm256_storeu_ps(c + r * ldc + 8 * v, acc[r][v]);
            }
        }
    }
}

template <std::size_t Rows>
inline void row_panel(std::size_t n, std::size_t k, const float* a, std::size_t lda, const float* b, std::size_t ldb,
                      float* c, std::size_t ldc, bool accumulate) {
    std::size_t j = 0;
    for (; j + 16 <= n; j += 16) {
        micro_kernel<Rows, 2, false>(k, a, lda, b + j, ldb, c + j, ldc, accumulate, 16);
    }
    if (j + 8 <= n) {
        micro_kernel<Rows, 1, false>(k, a, lda, b + j, ldb, c + j, ldc, accumulate, 8);
        j += 8;
    }
    if (j < n) {
        micro_kernel<Rows, 1, true>(k, a, lda, b + j, ldb, c + j, ldc, accumulate, n - j);
    }
}

void gemm_nn_avx2(std::size_t m, std::size_t n, std::size_t k, const float* a, std::size_t lda, const float* b,
                  std::size_t ldb, float* c, std::size_t ldc, bool accumulate) {
    std::size_t i = 0;
    for (; i + kRows <= m; i += kRows) {
        row_panel<kRows>(n, k, a + i * lda, lda, b, ldb, c + i * ldc, ldc, accumulate);
    }
    const float* ar = a + i * lda;
    float* cr = c + i * ldc;
    switch (m - i) {
    case 5: row_panel<5>(n, k, ar, lda, b, ldb, cr, ldc, accumulate); break;
    case 4: row_panel<4>(n, k, ar, lda, b, ldb, cr, ldc, accumulate); break;
    case 3: row_panel<3>(n, k, ar, lda, b, ldb, cr, ldc, accumulate); break;
    case 2: row_panel<2>(n, k, ar, lda, b, ldb, cr, ldc, accumulate); break;
    case 1: row_panel<1>(n, k, ar, lda, b, ldb, cr, ldc, accumulate); break;
    default: break;
    }
}

void relu_forward_avx2(const float* x, float* y, std::size_t n) {
    const __m256 zero = _mm256_setzero_ps();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        // max_ps returns the second operand for NaN and for +-0, matching the
        // scalar `x > 0 ? x : 0`.
        _mm256_storeu_ps(y + i, _mm256_max_ps(_mm256_loadu_ps(x + i), zero));
    }
    for (; i < n; ++i) {
        y[i] = x[i] > 0.0f ? x[i] : 0.0f;
    }
}

void relu_backward_avx2(const float* y, const float* dy, float* dx, std::size_t n) {
    const __m256 zero = _mm256_setzero_ps();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 positive = _mm256_cmp_ps(_mm256_loadu_ps(y + i), zero, _CMP_GT_OQ);
        _mm256_storeu_ps(dx + i, _mm256_and_ps(positive, _mm256_loadu_ps(dy + i)));
    }
    for (; i < n; ++i) {
        dx[i] = y[i] > 0.0f ? dy[i] : 0.0f;
    }
}

// No FMA here: the update must round exactly like the scalar reference.
void adam_update_avx2(float* param, float* m, float* v, const float* grad, std::size_t n,
                      const AdamCoefficients& c) {
    const __m256 b1 = _mm256_set1_ps(c.beta1);
    const __m256 omb1 = _mm256_set1_ps(c.one_minus_beta1);
    const __m256 b2 = _mm256_set1_ps(c.beta2);
    const __m256 omb2 = _mm256_set1_ps(c.one_minus_beta2);
    const __m256 bc1 = _mm256_set1_ps(c.bias_correction1);
    const __m256 bc2 = _mm256_set1_ps(c.bias_correction2);
    const __m256 lr = _mm256_set1_ps(c.learning_rate);
    const __m256 eps = _mm256_set1_ps(c.epsilon);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 g = _mm256_loadu_ps(grad + i);
        const __m256 mi = _mm256_add_ps(_mm256_mul_ps(b1, _mm256_loadu_ps(m + i)), _mm256_mul_ps(omb1, g));
        const __m256 vi =
            _mm256_add_ps(_mm256_mul_ps(b2, _mm256_loadu_ps(v + i)), _mm256_mul_ps(omb2, _mm256_mul_ps(g, g)));
        _mm256_storeu_ps(m + i, mi);
        _mm256_storeu_ps(v + i, vi);
        const __m256 m_hat = _mm256_div_ps(mi, bc1);
        const __m256 v_hat = _mm256_div_ps(vi, bc2);
        const __m256 step = _mm256_div_ps(_mm256_mul_ps(lr, m_hat), _mm256_add_ps(_mm256_sqrt_ps(v_hat), eps));
        _mm256_storeu_ps(param + i, _mm256_sub_ps(_mm256_loadu_ps(param + i), step));
    }
    for (; i < n; ++i) {
        const float g = grad[i];
        const float mi = c.beta1 * m[i] + c.one_minus_beta1 * g;
        const float vi = c.beta2 * v[i] + c.one_minus_beta2 * (g * g);
        m[i] = mi;
        v[i] = vi;
        const float m_hat = mi / c.bias_correction1;
        const float v_hat = vi / c.bias_correction2;
        param[i] = param[i] - c.learning_rate * m_hat / (__builtin_sqrtf(v_hat) + c.epsilon);
    }
}

void normalize_counts_avx2(const std::uint32_t* counts, float* out, std::size_t n, std::uint32_t max_count) {
    const __m256 denom = _mm256_set1_ps(static_cast<float>(max_count));
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256i raw = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(counts + i));
        _mm256_storeu_ps(out + i, _mm256_div_ps(_mm256_cvtepi32_ps(raw), denom));
    }
    for (; i < n; ++i) {
        out[i] = static_cast<float>(counts[i]) / static_cast<float>(max_count);
    }
}

} // namespace

const KernelTable detail::avx2_table{
    "avx2", gemm_nn_avx2, relu_forward_avx2, relu_backward_avx2, adam_update_avx2, normalize_counts_avx2,
};

} // namespace bsid::simd
