#include <doctest.h>

#include <cmath>
#include <cstring>

#include "bsid/nn/adam.hpp"
#include "bsid/nn/checkpoint.hpp"
#include "bsid/nn/trainer.hpp"
#include "support/gradcheck.hpp"

using namespace bsid;
using namespace bsid::nn;

namespace {

// Single weight w (bias frozen) so gradients can be fed by hand.
Graph scalar_param(float w) {
    Graph g({1}, 0);
    g.add("d", LayerSpec::dense(1), kGraphInput);
    g.parameters()[0].value[0] = w;
    g.parameters()[1].trainable = false;
    return g;
}

Gradients<float> grad_of(float gw) {
    Gradients<float> g;
    g.params = {Tensor({1, 1}, gw), Tensor()};
    return g;
}

} // namespace

TEST_CASE("adam basics") {
    SUBCASE("zero gradient") {
        Graph g = scalar_param(1.5f);
        Adam opt(g, {});
        opt.step(g, grad_of(0.3f));
        const float m = opt.first_moments()[0][0];
        const float p = g.parameters()[0].value[0];
        opt.step(g, grad_of(0.0f));
        CHECK(opt.first_moments()[0][0] == doctest::Approx(0.9 * m));
        // m stays nonzero, so the parameter keeps drifting; moments decay
        CHECK(opt.steps() == 2);
        CHECK(std::abs(g.parameters()[0].value[0] - p) < 1.1e-3);
        CHECK(opt.first_moments()[1].empty());
    }
    SUBCASE("first step moves by lr in the sign of the gradient") {
        for (float gw : {-3.0f, 0.01f, 250.0f}) {
            Graph g = scalar_param(0.0f);
            Adam opt(g, {});
            opt.step(g, grad_of(gw));
            CHECK(g.parameters()[0].value[0] == doctest::Approx(gw > 0 ? -1e-3 : 1e-3).epsilon(1e-4));
        }
    }
    SUBCASE("converges on x^2") {
        Graph g = scalar_param(5.0f);
        Adam opt(g, {0.1f});
        for (int i = 0; i < 100; ++i) opt.step(g, grad_of(2.0f * g.parameters()[0].value[0]));
        CHECK(std::abs(g.parameters()[0].value[0]) < 0.5f);
    }
    SUBCASE("gradients must match the trainable set") {
        Graph g = scalar_param(1.0f);
        Adam opt(g, {});
        Gradients<float> extra;
        extra.params = {Tensor({1, 1}), Tensor({1})};
        CHECK_THROWS_AS(opt.step(g, extra), Error);
        Gradients<float> missing;
        missing.params = {Tensor(), Tensor()};
        CHECK_THROWS_AS(opt.step(g, missing), Error);
    }
}

namespace {

Graph classifier(std::uint64_t seed) {
    Graph g({2}, seed);
    const int a = g.add("h", LayerSpec::dense(16), kGraphInput);
    const int r = g.add("r", LayerSpec::relu(), a);
    const int bn = g.add("bn", LayerSpec::batchnorm(), r);
    const int drop = g.add("drop", LayerSpec::dropout(0.1f), bn);
    const int o = g.add("o", LayerSpec::dense(1), drop);
    g.add("s", LayerSpec::sigmoid(), o);
    return g;
}

struct Blobs {
    Tensor x;
    Tensor y;
};

Blobs make_blobs(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    Blobs b{Tensor({n, 2}), Tensor({n, 1})};
    for (std::size_t i = 0; i < n; ++i) {
        const bool pos = rng.below(2) == 1;
        b.y[i] = pos ? 1.0f : 0.0f;
        const double r = pos ? 2.0 : 0.5;
        const double t = rng.uniform(0, 6.283185307179586);
        b.x[2 * i] = static_cast<float>(r * std::cos(t) + rng.uniform(-0.2, 0.2));
        b.x[2 * i + 1] = static_cast<float>(r * std::sin(t) + rng.uniform(-0.2, 0.2));
    }
    return b;
}

} // namespace

TEST_CASE("fit learns a non-linear boundary and is reproducible") {
    const Blobs data = make_blobs(600, 3);
    auto loss = [&](const Tensor& out, std::span<const std::size_t> rows) {
        return binary_cross_entropy(out, gather_rows(data.y, rows));
    };
    FitConfig cfg;
    cfg.epochs = 40;
    cfg.batch_size = 32;
    cfg.adam.learning_rate = 1e-2f;
    cfg.seed = 9;

    Graph a = classifier(1);
    const auto hist = fit(a, data.x, loss, cfg);
    CHECK(hist.back() < hist.front());
    const Tensor p = predict_batched(a, data.x);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < 600; ++i) correct += (p[i] >= 0.5f) == (data.y[i] == 1.0f);
    CHECK(correct > 570);

    Graph b = classifier(1);
    fit(b, data.x, loss, cfg);
    CHECK(save_checkpoint(a) == save_checkpoint(b));
}

TEST_CASE("frozen parameters stay bit-identical through fit") {
    const Blobs data = make_blobs(200, 4);
    auto loss = [&](const Tensor& out, std::span<const std::size_t> rows) {
        return binary_cross_entropy(out, gather_rows(data.y, rows));
    };
    Graph g = classifier(2);
    for (std::size_t p : g.node(g.find("h")).params) g.parameters()[p].trainable = false;
    const auto before = g.parameters();
    FitConfig cfg;
    cfg.epochs = 3;
    cfg.batch_size = 16;
    fit(g, data.x, loss, cfg);
    for (std::size_t i = 0; i < before.size(); ++i) {
        if (!before[i].trainable && !before[i].is_statistic()) {
            CHECK(std::memcmp(before[i].value.data(), g.parameters()[i].value.data(),
                              before[i].value.size() * sizeof(float)) == 0);
        }
    }
    CHECK(!(before[g.node(g.find("o")).params[0]].value == g.parameters()[g.node(g.find("o")).params[0]].value));
}

TEST_CASE("fit rejects empty input") {
    Graph g = classifier(3);
    auto loss = [](const Tensor& out, std::span<const std::size_t>) { return binary_cross_entropy(out, out); };
    CHECK_THROWS_AS(fit(g, Tensor({0, 2}), loss, {}), Error);
}
