#include <doctest.h>

#include <cmath>
#include <numeric>

#include "bsid/nn/loss.hpp"
#include "bsid/nn/ops.hpp"
#include "support/gradcheck.hpp"

using namespace bsid;
using namespace bsid::nn;

namespace {

// Direct cross-correlation with TensorFlow-style same padding.
TensorD conv_oracle(const TensorD& in, const TensorD& w, const TensorD& b, std::size_t stride) {
    const std::size_t n = in.dim(0), h = in.dim(1), wd = in.dim(2), c = in.dim(3), k = w.dim(3);
    const std::size_t oh = (h + stride - 1) / stride, ow = (wd + stride - 1) / stride;
    const long pad_h = static_cast<long>(std::max<long>(0, static_cast<long>((oh - 1) * stride + 3) - static_cast<long>(h)) / 2);
    const long pad_w = static_cast<long>(std::max<long>(0, static_cast<long>((ow - 1) * stride + 3) - static_cast<long>(wd)) / 2);
    TensorD out({n, oh, ow, k});
    for (std::size_t s = 0; s < n; ++s)
        for (std::size_t y = 0; y < oh; ++y)
            for (std::size_t x = 0; x < ow; ++x)
                for (std::size_t o = 0; o < k; ++o) {
                    double acc = b[o];
                    for (long dy = 0; dy < 3; ++dy)
                        for (long dx = 0; dx < 3; ++dx) {
                            const long iy = static_cast<long>(y * stride) + dy - pad_h;
                            const long ix = static_cast<long>(x * stride) + dx - pad_w;
                            if (iy < 0 || ix < 0 || iy >= static_cast<long>(h) || ix >= static_cast<long>(wd)) continue;
                            for (std::size_t i = 0; i < c; ++i)
                                acc += in[((s * h + iy) * wd + ix) * c + i] * w[((dy * 3 + dx) * c + i) * k + o];
                        }
                    out[((s * oh + y) * ow + x) * k + o] = acc;
                }
    return out;
}

} // namespace

TEST_CASE("same padding shape law") {
    CHECK(ops::same_extent(16, 1) == 16);
    CHECK(ops::same_extent(16, 2) == 8);
    CHECK(ops::same_extent(5, 2) == 3);
    CHECK(ops::same_pad_before(16, 1) == 1);
    CHECK(ops::same_pad_before(16, 2) == 0);  // the extra row/column goes bottom/right
    CHECK(ops::same_pad_before(5, 2) == 1);
}

TEST_CASE("conv2d trivial cases") {
    SUBCASE("zero input yields the bias") {
        Tensor in({1, 4, 4, 2});
        Tensor w({3, 3, 2, 3}, 0.7f);
        Tensor b({3}, std::vector<float>{0.5f, -1.0f, 2.0f});
        const Tensor out = ops::conv2d_forward(in, w, b, 1);
        for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] == b[i % 3]);
    }
    SUBCASE("single pixel, centre tap") {
        Tensor in({1, 1, 1, 1}, 3.0f);
        Tensor w({3, 3, 1, 1});
        w[4] = 2.5f;
        const Tensor out = ops::conv2d_forward(in, w, Tensor({1}), 1);
        CHECK(out.shape() == Shape{1, 1, 1, 1});
        CHECK(out[0] == 7.5f);

        Tensor up({1, 1, 1, 1}, 2.0f);
        Tensor gi, gw, gb;
        ops::conv2d_backward(up, in, w, 1, &gi, &gw, &gb);
        CHECK(gw[4] == 6.0f);
        CHECK(gi[0] == 5.0f);
        CHECK(gb[0] == 2.0f);
    }
    SUBCASE("zero upstream gradient") {
        Rng rng(3);
        const Tensor in = testing::random_tensor({2, 5, 5, 2}, rng).cast<float>();
        const Tensor w = testing::random_tensor({3, 3, 2, 4}, rng).cast<float>();
        Tensor gi, gw, gb;
        ops::conv2d_backward(Tensor({2, 5, 5, 4}), in, w, 1, &gi, &gw, &gb);
        for (float v : gi.values()) CHECK(v == 0.0f);
        for (float v : gw.values()) CHECK(v == 0.0f);
        for (float v : gb.values()) CHECK(v == 0.0f);
    }
    SUBCASE("channel mismatch") {
        CHECK_THROWS_AS(ops::conv2d_forward(Tensor({1, 3, 3, 2}), Tensor({3, 3, 3, 1}), Tensor({1}), 1), Error);
    }
}

TEST_CASE("conv2d matches a direct loop oracle") {
    Rng rng(19);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t h = 1 + rng.below(9), w = 1 + rng.below(9), c = 1 + rng.below(4), k = 1 + rng.below(5);
        const std::size_t stride = 1 + rng.below(2);
        const TensorD in = testing::random_tensor({2, h, w, c}, rng);
        const TensorD wt = testing::random_tensor({3, 3, c, k}, rng);
        const TensorD b = testing::random_tensor({k}, rng);
        const TensorD want = conv_oracle(in, wt, b, stride);

        const TensorD got_d = ops::conv2d_forward(in, wt, b, stride);
        const Tensor got_f = ops::conv2d_forward(in.cast<float>(), wt.cast<float>(), b.cast<float>(), stride);
        REQUIRE(got_d.shape() == want.shape());
        REQUIRE(got_f.shape() == want.shape());
        for (std::size_t i = 0; i < want.size(); ++i) {
            REQUIRE(std::abs(got_d[i] - want[i]) <= 1e-12 * (1 + std::abs(want[i])));
            REQUIRE(std::abs(got_f[i] - want[i]) <= 1e-5 * (1 + std::abs(want[i])));
        }
    }
}

TEST_CASE("batchnorm") {
    SUBCASE("two-sample batch {1, 3}") {
        Tensor in({2, 1}, std::vector<float>{1.0f, 3.0f});
        Tensor rm({1}), rv({1}, 1.0f);
        ops::BatchNormCache<float> cache;
        const Tensor out = ops::batchnorm_forward_train(in, Tensor({1}, 1.0f), Tensor({1}), 1e-3f, 0.99f, rm, rv, cache);
        const double expect = 1.0 / std::sqrt(1.0 + 1e-3);
        CHECK(out[0] == doctest::Approx(-expect));
        CHECK(out[1] == doctest::Approx(expect));
        CHECK(rm[0] == doctest::Approx(0.02));             // 0.99 * 0 + 0.01 * 2
        CHECK(rv[0] == doctest::Approx(0.99 + 0.01 * 1));  // biased batch variance 1
    }
    SUBCASE("gamma zero gives beta") {
        Rng rng(5);
        const Tensor in = testing::random_tensor({4, 3, 3, 2}, rng).cast<float>();
        Tensor rm({2}), rv({2}, 1.0f);
        ops::BatchNormCache<float> cache;
        const Tensor beta({2}, std::vector<float>{0.25f, -4.0f});
        const Tensor out = ops::batchnorm_forward_train(in, Tensor({2}), beta, 1e-3f, 0.99f, rm, rv, cache);
        for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] == beta[i % 2]);
    }
    SUBCASE("infer uses the running statistics") {
        Rng rng(6);
        const TensorD in = testing::random_tensor({5, 2, 2, 3}, rng, -3, 3);
        const TensorD gamma = testing::random_tensor({3}, rng), beta = testing::random_tensor({3}, rng);
        const TensorD rm = testing::random_tensor({3}, rng), rv = testing::random_tensor({3}, rng, 0.2, 2.0);
        const TensorD out = ops::batchnorm_forward_infer(in, gamma, beta, rm, rv, 1e-3);
        for (std::size_t i = 0; i < in.size(); ++i) {
            const std::size_t ch = i % 3;
            const double want = gamma[ch] * (in[i] - rm[ch]) / std::sqrt(rv[ch] + 1e-3) + beta[ch];
            CHECK(out[i] == doctest::Approx(want).epsilon(1e-12));
        }
    }
    SUBCASE("train mode needs two samples") {
        Tensor rm({1}), rv({1}, 1.0f);
        ops::BatchNormCache<float> cache;
        try {
            ops::batchnorm_forward_train(Tensor({1, 4, 4, 1}), Tensor({1}, 1.0f), Tensor({1}), 1e-3f, 0.99f, rm, rv,
                                         cache);
            FAIL("expected BatchTooSmall");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::BatchTooSmall);
        }
    }
}

TEST_CASE("activations and concat") {
    const Tensor r = ops::relu_forward(Tensor({1, 3}, std::vector<float>{-1.0f, 0.0f, 2.0f}));
    CHECK(r == Tensor({1, 3}, std::vector<float>{0.0f, 0.0f, 2.0f}));

    const Tensor s = ops::softmax_forward(Tensor({1, 4}));
    for (float v : s.values()) CHECK(v == doctest::Approx(0.25));

    Rng rng(9);
    const Tensor big = testing::random_tensor({50, 7}, rng, -500, 500).cast<float>();
    const Tensor sm = ops::softmax_forward(big);
    for (std::size_t row = 0; row < 50; ++row) {
        double sum = 0;
        for (std::size_t j = 0; j < 7; ++j) {
            REQUIRE(std::isfinite(sm[row * 7 + j]));
            sum += sm[row * 7 + j];
        }
        CHECK(std::abs(sum - 1.0) < 1e-6);
    }
    const Tensor sg = ops::sigmoid_forward(testing::random_tensor({100}, rng, -10, 10).cast<float>());
    for (float v : sg.values()) CHECK((v > 0.0f && v < 1.0f));

    Tensor a({2, 16, 16, 1}), b({2, 16, 16, 8});
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = static_cast<float>(i);
    for (std::size_t i = 0; i < b.size(); ++i) b[i] = -static_cast<float>(i);
    const Tensor* parts[] = {&a, &b};
    const Tensor cat = ops::concat_channels_forward<float>(parts);
    CHECK(cat.shape() == Shape{2, 16, 16, 9});
    for (std::size_t px = 0; px < 2 * 256; ++px) {
        REQUIRE(cat[px * 9] == a[px]);
        for (std::size_t ch = 0; ch < 8; ++ch) REQUIRE(cat[px * 9 + 1 + ch] == b[px * 8 + ch]);
    }
    const std::size_t widths[] = {1, 8};
    const auto back = ops::concat_channels_backward(cat, widths);
    CHECK(back[0] == a);
    CHECK(back[1] == b);

    Tensor c({2, 8, 8, 1});
    const Tensor* bad[] = {&a, &c};
    try {
        ops::concat_channels_forward<float>(bad);
        FAIL("expected ConcatSpatialMismatch");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ConcatSpatialMismatch);
    }
}

TEST_CASE("losses") {
    const auto bce = binary_cross_entropy(Tensor({1, 1}, 0.5f), Tensor({1, 1}, 1.0f));
    CHECK(bce.value == doctest::Approx(std::log(2.0)));
    const auto cce = categorical_cross_entropy(Tensor({1, 4}, 0.25f), Tensor({1, 4}, std::vector<float>{0, 0, 1, 0}));
    CHECK(cce.value == doctest::Approx(std::log(4.0)));

    // clamp keeps saturated predictions finite
    const auto sat = binary_cross_entropy(TensorD({2, 1}, std::vector<double>{0.0, 1.0}),
                                          TensorD({2, 1}, std::vector<double>{1.0, 0.0}));
    CHECK(std::isfinite(sat.value));
    CHECK(sat.value == doctest::Approx(-std::log(1e-7)).epsilon(1e-9));

    CHECK_THROWS_AS(binary_cross_entropy(Tensor({2, 1}), Tensor({3, 1})), Error);

    Rng rng(21);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 2 + rng.below(5), k = 2 + rng.below(4);
        TensorD p = testing::random_tensor({n, 1}, rng, 0.05, 0.95);
        TensorD t({n, 1});
        for (auto& v : t.values()) v = static_cast<double>(rng.below(2));
        const double w = rng.uniform(0.5, 5.0);
        const auto r = binary_cross_entropy(p, t, w);
        for (std::size_t i = 0; i < n; ++i) {
            TensorD up = p, dn = p;
            up[i] += 1e-6;
            dn[i] -= 1e-6;
            const double fd = (binary_cross_entropy(up, t, w).value - binary_cross_entropy(dn, t, w).value) / 2e-6;
            CHECK(testing::relative_error(r.grad[i], fd) < 1e-4);
        }

        TensorD q = testing::random_tensor({n, k}, rng, 0.05, 1.0);
        TensorD oh({n, k});
        for (std::size_t row = 0; row < n; ++row) oh[row * k + rng.below(k)] = 1.0;
        const auto rc = categorical_cross_entropy(q, oh);
        for (std::size_t i = 0; i < q.size(); ++i) {
            TensorD up = q, dn = q;
            up[i] += 1e-6;
            dn[i] -= 1e-6;
            const double fd = (categorical_cross_entropy(up, oh).value - categorical_cross_entropy(dn, oh).value) / 2e-6;
            CHECK(testing::relative_error(rc.grad[i], fd) < 1e-4);
        }
    }
}

TEST_CASE("finite-difference gradient check per layer kind (quick)") {
    for (LayerKind kind : testing::kAllLayerKinds) {
        CAPTURE(to_string(kind));
        for (std::uint64_t trial = 0; trial < 8; ++trial) {
            auto c = testing::make_case(kind, 1000 + trial);
            const auto stats = testing::check_gradients(c, trial);
            CHECK(stats.coordinates > 0);
            CHECK(stats.max_rel_error < 1e-4);
        }
    }
}
