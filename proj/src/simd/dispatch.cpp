#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <string_view>
#include <vector>

#include "bsid/simd/kernels.hpp"
#include "kernels_internal.hpp"

namespace bsid::simd {
namespace {

bool cpu_supports_avx2() {
#if defined(BSID_HAVE_AVX2_KERNELS) && (defined(__x86_64__) || defined(__i386__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const KernelTable& resolve() {
    const char* forced = std::getenv("BSID_SIMD");
    if (forced != nullptr && std::string_view(forced) == "scalar") {
        return scalar_kernels();
    }
    if (const KernelTable* vec = avx2_kernels()) {
        return *vec;
    }
    return scalar_kernels();
}

std::atomic<const KernelTable*>& active_slot() {
    static std::atomic<const KernelTable*> slot{&resolve()};
    return slot;
}

// Operand panels along k are packed this many rows at a time so the
// transposed copies stay cache resident.
constexpr std::size_t kPanel = 256;

void transpose_block(const float* src, std::size_t ld, std::size_t rows, std::size_t cols, float* dst) {
    // dst is cols x rows, dense.
    for (std::size_t r = 0; r < rows; ++r) {
        const float* s = src + r * ld;
        for (std::size_t c = 0; c < cols; ++c) {
            dst[c * rows + r] = s[c];
        }
    }
}

} // namespace

const KernelTable* avx2_kernels() {
#if defined(BSID_HAVE_AVX2_KERNELS)
    static const bool supported = cpu_supports_avx2();
    return supported ? &detail::avx2_table : nullptr;
#else
    return nullptr;
#endif
}

const KernelTable& active() { return *active_slot().load(std::memory_order_acquire); }

void set_active(const KernelTable& table) { active_slot().store(&table, std::memory_order_release); }

void gemm(const KernelTable& table, Trans ta, Trans tb, std::size_t m, std::size_t n, std::size_t k, const float* a,
          std::size_t lda, const float* b, std::size_t ldb, float* c, std::size_t ldc, bool accumulate) {
    if (m == 0 || n == 0) {
        return;
    }
    if (k == 0) {
        if (!accumulate) {
            for (std::size_t i = 0; i < m; ++i) {
                std::fill_n(c + i * ldc, n, 0.0f);
            }
        }
        return;
    }
    if (ta == Trans::No && tb == Trans::No) {
        table.gemm_nn(m, n, k, a, lda, b, ldb, c, ldc, accumulate);
        return;
    }
    thread_local std::vector<float> a_pack;
    thread_local std::vector<float> b_pack;
    for (std::size_t p0 = 0; p0 < k; p0 += kPanel) {
        const std::size_t kb = std::min(kPanel, k - p0);
        const float* ap = a + p0;
        std::size_t ap_ld = lda;
        if (ta == Trans::Yes) {
            // A is k x m; rows p0..p0+kb become an m x kb panel.
            a_pack.resize(m * kb);
            transpose_block(a + p0 * lda, lda, kb, m, a_pack.data());
            ap = a_pack.data();
            ap_ld = kb;
        }
        const float* bp = b + p0 * ldb;
        std::size_t bp_ld = ldb;
        if (tb == Trans::Yes) {
            // B is n x k; columns p0..p0+kb become a kb x n panel.
            b_pack.resize(kb * n);
            transpose_block(b + p0, ldb, n, kb, b_pack.data());
            bp = b_pack.data();
            bp_ld = n;
        }
        table.gemm_nn(m, n, kb, ap, ap_ld, bp, bp_ld, c, ldc, accumulate || p0 > 0);
    }
}

} // namespace bsid::simd
