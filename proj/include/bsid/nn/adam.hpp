#pragma once

#include <cstdint>
#include <vector>

#include "bsid/nn/graph.hpp"

namespace bsid::nn {

struct AdamConfig {
    float learning_rate = 1e-3f;
    float beta1 = 0.9f;
    float beta2 = 0.999f;
    float epsilon = 1e-8f;
};

/// Adam with bias correction. Moments are allocated only for the parameters
/// that were trainable when the optimizer was created; everything else is
/// never written.
class Adam {
public:
    Adam(const Graph& graph, AdamConfig config);

    /// Applies one update. `grads` must hold a gradient for exactly the
    /// trainable parameters (InvalidArgument otherwise).
    void step(Graph& graph, const Gradients<float>& grads);

    std::uint64_t steps() const { return steps_; }
    const AdamConfig& config() const { return config_; }

    /// Empty tensors for parameters without optimizer state.
    const std::vector<Tensor>& first_moments() const { return m_; }
    const std::vector<Tensor>& second_moments() const { return v_; }

private:
    AdamConfig config_;
    std::vector<Tensor> m_;
    std::vector<Tensor> v_;
    std::uint64_t steps_ = 0;
};

} // namespace bsid::nn
