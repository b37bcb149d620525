#pragma once

// Finite-difference gradient checks for every layer kind, in double precision.
// Shared by the unit tests and the acceptance binary.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "bsid/nn/graph.hpp"
#include "bsid/util/random.hpp"

namespace bsid::testing {

struct GradCheckCase {
    nn::GraphD graph;
    nn::TensorD input;
    nn::Mode mode = nn::Mode::Train;
};

struct GradCheckStats {
    double max_rel_error = 0.0;
    std::size_t coordinates = 0;
};

inline double relative_error(double analytic, double numeric) {
    // Floor keeps coordinates whose true gradient is ~0 from dividing noise by noise.
    const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
    return std::abs(analytic - numeric) / denom;
}

inline nn::TensorD random_tensor(nn::Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
    nn::TensorD t(std::move(shape));
    for (auto& v : t.values()) {
        v = rng.uniform(lo, hi);
    }
    return t;
}

/// Builds a small graph exercising `kind` as its final (or central) node.
inline GradCheckCase make_case(nn::LayerKind kind, std::uint64_t seed) {
    using nn::LayerSpec;
    Rng rng(seed);
    const std::size_t batch = 3 + rng.below(3);
    GradCheckCase c;
    switch (kind) {
    case nn::LayerKind::Conv2D: {
        const std::size_t h = 3 + rng.below(4);
        const std::size_t w = 3 + rng.below(4);
        const std::size_t ch = 1 + rng.below(3);
        c.graph = nn::GraphD({h, w, ch}, seed);
        c.graph.add("conv", LayerSpec::conv2d(static_cast<std::uint32_t>(1 + rng.below(4)),
                                              static_cast<std::uint32_t>(1 + rng.below(2))),
                    nn::kGraphInput);
        c.input = random_tensor({batch, h, w, ch}, rng);
        break;
    }
    case nn::LayerKind::BatchNorm: {
        const std::size_t ch = 1 + rng.below(4);
        c.graph = nn::GraphD({2, 2, ch}, seed);
        c.graph.add("bn", LayerSpec::batchnorm(), nn::kGraphInput);
        // gamma/beta away from their 1/0 init so both show up in the check
        for (auto& p : c.graph.parameters()) {
            for (auto& v : p.value.values()) {
                if (p.role == nn::ParamRole::Gamma) v = rng.uniform(0.5, 1.5);
                if (p.role == nn::ParamRole::Beta) v = rng.uniform(-0.5, 0.5);
                if (p.role == nn::ParamRole::RunningMean) v = rng.uniform(-0.5, 0.5);
                if (p.role == nn::ParamRole::RunningVar) v = rng.uniform(0.5, 2.0);
            }
        }
        c.mode = rng.below(2) == 0 ? nn::Mode::Train : nn::Mode::Infer;
        c.input = random_tensor({batch, 2, 2, ch}, rng, -2.0, 2.0);
        break;
    }
    case nn::LayerKind::ReLU: {
        const std::size_t n = 4 + rng.below(8);
        c.graph = nn::GraphD({n}, seed);
        c.graph.add("relu", LayerSpec::relu(), nn::kGraphInput);
        c.input = random_tensor({batch, n}, rng);
        for (auto& v : c.input.values()) {
            if (std::abs(v) < 0.05) v = v < 0 ? -0.05 : 0.05;  // stay off the kink
        }
        break;
    }
    case nn::LayerKind::Dense: {
        const std::size_t n = 2 + rng.below(8);
        c.graph = nn::GraphD({n}, seed);
        c.graph.add("dense", LayerSpec::dense(static_cast<std::uint32_t>(1 + rng.below(6))), nn::kGraphInput);
        c.input = random_tensor({batch, n}, rng);
        for (auto& p : c.graph.parameters()) {
            if (p.role == nn::ParamRole::Bias) {
                for (auto& v : p.value.values()) v = rng.uniform(-0.5, 0.5);
            }
        }
        break;
    }
    case nn::LayerKind::Dropout: {
        const std::size_t n = 4 + rng.below(12);
        c.graph = nn::GraphD({n}, seed);
        c.graph.add("drop", LayerSpec::dropout(0.2f + 0.3f * static_cast<float>(rng.below(2))), nn::kGraphInput);
        c.input = random_tensor({batch, n}, rng);
        break;
    }
    case nn::LayerKind::Flatten: {
        c.graph = nn::GraphD({2, 3, 2}, seed);
        const int f = c.graph.add("flat", LayerSpec::flatten(), nn::kGraphInput);
        c.graph.add("dense", LayerSpec::dense(3), f);
        c.input = random_tensor({batch, 2, 3, 2}, rng);
        break;
    }
    case nn::LayerKind::ConcatChannels: {
        const std::size_t ch = 1 + rng.below(3);
        c.graph = nn::GraphD({3, 3, ch}, seed);
        const int conv = c.graph.add("conv", LayerSpec::conv2d(2), nn::kGraphInput);
        c.graph.add("cat", LayerSpec::concat_channels(), std::vector<int>{nn::kGraphInput, conv});
        c.input = random_tensor({batch, 3, 3, ch}, rng);
        break;
    }
    case nn::LayerKind::Sigmoid: {
        const std::size_t n = 2 + rng.below(8);
        c.graph = nn::GraphD({n}, seed);
        c.graph.add("sigmoid", LayerSpec::sigmoid(), nn::kGraphInput);
        c.input = random_tensor({batch, n}, rng, -4.0, 4.0);
        break;
    }
    case nn::LayerKind::Softmax: {
        const std::size_t n = 2 + rng.below(8);
        c.graph = nn::GraphD({n}, seed);
        c.graph.add("softmax", LayerSpec::softmax(), nn::kGraphInput);
        c.input = random_tensor({batch, n}, rng, -3.0, 3.0);
        break;
    }
    }
    return c;
}

/// Compares backward() with central differences of L = sum(R * output) for a
/// fixed random R. Every input coordinate is checked, plus up to
/// `param_coords` randomly chosen trainable parameter coordinates.
inline GradCheckStats check_gradients(GradCheckCase& c, std::uint64_t seed, std::size_t param_coords = 32,
                                      double step = 1e-4) {
    Rng rng(seed ^ 0xC0FFEEULL);
    const std::uint64_t counter = c.graph.dropout_counter();
    const auto snapshot = c.graph.parameters();

    auto eval = [&](const nn::TensorD& in) {
        c.graph.set_dropout_counter(counter);  // same dropout mask every time
        return c.graph.forward(in, c.mode);
    };
    nn::TensorD y = eval(c.input);
    const nn::TensorD projection = random_tensor(y.shape(), rng);
    auto objective = [&](const nn::TensorD& in) {
        const nn::TensorD out = eval(in);
        double s = 0.0;
        for (std::size_t i = 0; i < out.size(); ++i) s += projection[i] * out[i];
        // running statistics move in train mode; they never affect train outputs
        // but must not leak into later infer-mode evaluations
        for (std::size_t i = 0; i < snapshot.size(); ++i) {
            if (snapshot[i].is_statistic()) c.graph.parameters()[i].value = snapshot[i].value;
        }
        return s;
    };

    c.graph.set_dropout_counter(counter);
    nn::ForwardCache<double> cache;
    c.graph.forward(c.input, c.mode, &cache);
    for (std::size_t i = 0; i < snapshot.size(); ++i) {
        if (snapshot[i].is_statistic()) c.graph.parameters()[i].value = snapshot[i].value;
    }
    const nn::Gradients<double> grads = c.graph.backward(cache, projection, true);

    GradCheckStats stats;
    nn::TensorD probe = c.input;
    for (std::size_t i = 0; i < probe.size(); ++i) {
        const double x = probe[i];
        probe[i] = x + step;
        const double up = objective(probe);
        probe[i] = x - step;
        const double down = objective(probe);
        probe[i] = x;
        stats.max_rel_error = std::max(stats.max_rel_error, relative_error(grads.input[i], (up - down) / (2 * step)));
        ++stats.coordinates;
    }

    std::vector<std::pair<std::size_t, std::size_t>> coords;
    auto& params = c.graph.parameters();
    for (std::size_t p = 0; p < params.size(); ++p) {
        if (!params[p].trainable) continue;
        for (std::size_t j = 0; j < params[p].value.size(); ++j) coords.emplace_back(p, j);
    }
    rng.shuffle(std::span(coords));
    coords.resize(std::min(coords.size(), param_coords));
    for (auto [p, j] : coords) {
        double& w = params[p].value[j];
        const double saved = w;
        w = saved + step;
        const double up = objective(c.input);
        w = saved - step;
        const double down = objective(c.input);
        w = saved;
        stats.max_rel_error =
            std::max(stats.max_rel_error, relative_error(grads.params[p][j], (up - down) / (2 * step)));
        ++stats.coordinates;
    }
    return stats;
}

inline constexpr nn::LayerKind kAllLayerKinds[] = {
    nn::LayerKind::Conv2D,  nn::LayerKind::BatchNorm,      nn::LayerKind::ReLU,
    nn::LayerKind::Dense,   nn::LayerKind::Dropout,        nn::LayerKind::Flatten,
    nn::LayerKind::ConcatChannels, nn::LayerKind::Sigmoid, nn::LayerKind::Softmax,
};

} // namespace bsid::testing
