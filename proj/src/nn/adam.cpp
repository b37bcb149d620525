#include "bsid/nn/adam.hpp"

#include <cmath>

#include "bsid/simd/kernels.hpp"

namespace bsid::nn {

Adam::Adam(const Graph& graph, AdamConfig config) : config_(config) {
    if (!(config.learning_rate > 0.0f)) {
        throw Error(ErrorCode::InvalidArgument, "learning rate must be positive");
    }
    const auto& params = graph.parameters();
    m_.resize(params.size());
    v_.resize(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (params[i].trainable) {
            m_[i] = Tensor(params[i].value.shape());
            v_[i] = Tensor(params[i].value.shape());
        }
    }
}

void Adam::step(Graph& graph, const Gradients<float>& grads) {
    auto& params = graph.parameters();
    if (grads.params.size() != params.size() || m_.size() != params.size()) {
        throw Error(ErrorCode::InvalidArgument, "gradient list does not match the graph");
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        const bool has_state = !m_[i].empty();
        const bool has_grad = !grads.params[i].empty();
        if (has_state != has_grad || has_state != params[i].trainable) {
            throw Error(ErrorCode::InvalidArgument, "gradients must cover exactly the trainable parameters (" +
                                                        params[i].name + ")");
        }
        if (has_grad && grads.params[i].shape() != params[i].value.shape()) {
            throw Error(ErrorCode::ShapeMismatch, "gradient shape mismatch for " + params[i].name);
        }
    }

    ++steps_;
    const double t = static_cast<double>(steps_);
    const simd::AdamCoefficients coeff{
        config_.beta1,
        1.0f - config_.beta1,
        config_.beta2,
        1.0f - config_.beta2,
        static_cast<float>(1.0 - std::pow(static_cast<double>(config_.beta1), t)),
        static_cast<float>(1.0 - std::pow(static_cast<double>(config_.beta2), t)),
        config_.learning_rate,
        config_.epsilon,
    };
    const auto& kernels = simd::active();
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (m_[i].empty()) {
            continue;
        }
        kernels.adam_update(params[i].value.data(), m_[i].data(), v_[i].data(), grads.params[i].data(),
                            params[i].value.size(), coeff);
    }
}

} // namespace bsid::nn
