#include <cmath>

#include "bsid/simd/kernels.hpp"
#include "kernels_internal.hpp"

namespace bsid::simd {
namespace {

void gemm_nn_scalar(std::size_t m, std::size_t n, std::size_t k, const float* a, std::size_t lda, const float* b,
                    std::size_t ldb, float* c, std::size_t ldc, bool accumulate) {
    for (std::size_t i = 0; i < m; ++i) {
        float* crow = c + i * ldc;
        if (!accumulate) {
            for (std::size_t j = 0; j < n; ++j) {
                crow[j] = 0.0f;
            }
        }
        const float* arow = a + i * lda;
        for (std::size_t p = 0; p < k; ++p) {
            const float av = arow[p];
            const float* brow = b + p * ldb;
            for (std::size_t j = 0; j < n; ++j) {
                crow[j] += av * brow[j];
            }
        }
    }
}

void relu_forward_scalar(const float* x, float* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = x[i] > 0.0f ? x[i] : 0.0f;
    }
}

void relu_backward_scalar(const float* y, const float* dy, float* dx, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        dx[i] = y[i] > 0.0f ? dy[i] : 0.0f;
    }
}

void adam_update_scalar(float* param, float* m, float* v, const float* grad, std::size_t n,
                        const AdamCoefficients& c) {
    for (std::size_t i = 0; i < n; ++i) {
        const float g = grad[i];
        const float mi = c.beta1 * m[i] + c.one_minus_beta1 * g;
        const float vi = c.beta2 * v[i] + c.one_minus_beta2 * (g * g);
        m[i] = mi;
        v[i] = vi;
        const float m_hat = mi / c.bias_correction1;
        const float v_hat = vi / c.bias_correction2;
        param[i] = param[i] - c.learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon);
    }
}

void normalize_counts_scalar(const std::uint32_t* counts, float* out, std::size_t n, std::uint32_t max_count) {
    const auto denom = static_cast<float>(max_count);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = static_cast<float>(counts[i]) / denom;
    }
}

} // namespace

const KernelTable& scalar_kernels() {
    static const KernelTable table{
        "scalar", gemm_nn_scalar, relu_forward_scalar, relu_backward_scalar, adam_update_scalar,
        normalize_counts_scalar,
    };
    return table;
}

} // namespace bsid::simd
