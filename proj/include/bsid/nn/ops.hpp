#pragma once

// Forward and backward kernels for the nine layer kinds. All tensors carry a
// leading batch axis; spatial maps are [batch, height, width, channels].
// Instantiated for float (training) and double (gradient checks).

#include <cstddef>
#include <span>
#include <vector>

#include "bsid/nn/tensor.hpp"

namespace bsid::nn::ops {

/// Output extent of a same-padded 3x3 convolution.
constexpr std::size_t same_extent(std::size_t extent, std::size_t stride) { return (extent + stride - 1) / stride; }

/// Zero padding before the first row/column. Any odd padding goes to the
/// bottom/right edge.
constexpr std::size_t same_pad_before(std::size_t extent, std::size_t stride) {
    const std::size_t out = same_extent(extent, stride);
    const std::size_t needed = (out - 1) * stride + 3;
    return needed > extent ? (needed - extent) / 2 : 0;
}

// conv2d: weights [3, 3, in_channels, out_channels], bias [out_channels].
template <typename T>
BasicTensor<T> conv2d_forward(const BasicTensor<T>& input, const BasicTensor<T>& weights, const BasicTensor<T>& bias,
                              std::size_t stride);

/// Any gradient output may be null when it is not wanted; non-null outputs
/// are overwritten.
template <typename T>
void conv2d_backward(const BasicTensor<T>& upstream, const BasicTensor<T>& input, const BasicTensor<T>& weights,
                     std::size_t stride, BasicTensor<T>* input_grad, BasicTensor<T>* weight_grad,
                     BasicTensor<T>* bias_grad);

// batchnorm over the last axis.
template <typename T>
struct BatchNormCache {
    BasicTensor<T> normalized;
    std::vector<T> inv_std;
};

/// Batch statistics; updates running_mean/running_var as
/// running = momentum * running + (1 - momentum) * batch (biased variance).
template <typename T>
BasicTensor<T> batchnorm_forward_train(const BasicTensor<T>& input, const BasicTensor<T>& gamma,
                                       const BasicTensor<T>& beta, T epsilon, T momentum, BasicTensor<T>& running_mean,
                                       BasicTensor<T>& running_var, BatchNormCache<T>& cache);

/// Running statistics; cache (optional) receives the normalized input for a
/// later batchnorm_backward_infer.
template <typename T>
BasicTensor<T> batchnorm_forward_infer(const BasicTensor<T>& input, const BasicTensor<T>& gamma,
                                       const BasicTensor<T>& beta, const BasicTensor<T>& running_mean,
                                       const BasicTensor<T>& running_var, T epsilon,
                                       BatchNormCache<T>* cache = nullptr);

/// Gradient through batch statistics (train-mode forward).
template <typename T>
void batchnorm_backward(const BasicTensor<T>& upstream, const BatchNormCache<T>& cache, const BasicTensor<T>& gamma,
                        BasicTensor<T>* input_grad, BasicTensor<T>* gamma_grad, BasicTensor<T>* beta_grad);

/// Gradient through the fixed affine map of an infer-mode forward.
template <typename T>
void batchnorm_backward_infer(const BasicTensor<T>& upstream, const BatchNormCache<T>& cache,
                              const BasicTensor<T>& gamma, BasicTensor<T>* input_grad, BasicTensor<T>* gamma_grad,
                              BasicTensor<T>* beta_grad);

// dense: input [batch, in], weights [in, out], bias [out].
template <typename T>
BasicTensor<T> dense_forward(const BasicTensor<T>& input, const BasicTensor<T>& weights, const BasicTensor<T>& bias);

template <typename T>
void dense_backward(const BasicTensor<T>& upstream, const BasicTensor<T>& input, const BasicTensor<T>& weights,
                    BasicTensor<T>* input_grad, BasicTensor<T>* weight_grad, BasicTensor<T>* bias_grad);

template <typename T>
BasicTensor<T> relu_forward(const BasicTensor<T>& input);

/// Takes the forward output.
template <typename T>
BasicTensor<T> relu_backward(const BasicTensor<T>& upstream, const BasicTensor<T>& output);

template <typename T>
BasicTensor<T> sigmoid_forward(const BasicTensor<T>& input);

template <typename T>
BasicTensor<T> sigmoid_backward(const BasicTensor<T>& upstream, const BasicTensor<T>& output);

/// Row-wise over the last axis, with max subtraction.
template <typename T>
BasicTensor<T> softmax_forward(const BasicTensor<T>& input);

template <typename T>
BasicTensor<T> softmax_backward(const BasicTensor<T>& upstream, const BasicTensor<T>& output);

/// mask holds 0 or 1/(1-rate) per element (inverted dropout).
template <typename T>
BasicTensor<T> dropout_forward(const BasicTensor<T>& input, std::span<const T> mask);

template <typename T>
BasicTensor<T> dropout_backward(const BasicTensor<T>& upstream, std::span<const T> mask);

/// Stacks operands along the last axis in operand order. All operands must
/// agree on every other axis.
template <typename T>
BasicTensor<T> concat_channels_forward(std::span<const BasicTensor<T>* const> inputs);

template <typename T>
std::vector<BasicTensor<T>> concat_channels_backward(const BasicTensor<T>& upstream,
                                                     std::span<const std::size_t> channel_counts);

} // namespace bsid::nn::ops
