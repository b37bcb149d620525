#pragma once

#include <cstdint>
#include <string_view>

namespace bsid::nn {

enum class LayerKind : std::uint8_t {
    Conv2D = 1,
    BatchNorm = 2,
    ReLU = 3,
    Dense = 4,
    Dropout = 5,
    Flatten = 6,
    ConcatChannels = 7,
    Sigmoid = 8,
    Softmax = 9,
};

std::string_view to_string(LayerKind kind);

enum class Mode { Train, Infer };

/// Hyperparameters of one node. Only the fields relevant to `kind` are read.
struct LayerSpec {
    LayerKind kind = LayerKind::ReLU;
    std::uint32_t units = 0;    // conv2d out_channels, dense out_units
    std::uint32_t stride = 1;   // conv2d: 1 or 2 (3x3 kernel, same padding)
    float rate = 0.0f;          // dropout, in [0, 1)
    float epsilon = 1e-3f;      // batchnorm
    float momentum = 0.99f;     // batchnorm

    static LayerSpec conv2d(std::uint32_t out_channels, std::uint32_t stride = 1) {
        return {LayerKind::Conv2D, out_channels, stride};
    }
    static LayerSpec batchnorm(float epsilon = 1e-3f, float momentum = 0.99f) {
        LayerSpec s{LayerKind::BatchNorm};
        s.epsilon = epsilon;
        s.momentum = momentum;
        return s;
    }
    static LayerSpec relu() { return {LayerKind::ReLU}; }
    static LayerSpec dense(std::uint32_t out_units) { return {LayerKind::Dense, out_units}; }
    static LayerSpec dropout(float rate) {
        LayerSpec s{LayerKind::Dropout};
        s.rate = rate;
        return s;
    }
    static LayerSpec flatten() { return {LayerKind::Flatten}; }
    static LayerSpec concat_channels() { return {LayerKind::ConcatChannels}; }
    static LayerSpec sigmoid() { return {LayerKind::Sigmoid}; }
    static LayerSpec softmax() { return {LayerKind::Softmax}; }

    /// Throws InvalidArgument when a hyperparameter is outside its domain.
    void validate() const;

    bool operator==(const LayerSpec&) const = default;
};

} // namespace bsid::nn
