#pragma once

#include "bsid/nn/tensor.hpp"

namespace bsid::nn {

enum class LossKind { BinaryCrossEntropy, CategoricalCrossEntropy };

/// Predictions are clamped to [kProbabilityClamp, 1 - kProbabilityClamp]
/// before taking logarithms; the gradient is evaluated at the clamped value.
inline constexpr double kProbabilityClamp = 1e-7;

template <typename T>
struct LossResult {
    T value;
    BasicTensor<T> grad;  // d loss / d predictions
};

/// Mean over the batch of -(w t log p + (1 - t) log(1 - p)), where w is
/// positive_weight. predictions and targets are [batch, 1] (or any equal shape).
template <typename T>
LossResult<T> binary_cross_entropy(const BasicTensor<T>& predictions, const BasicTensor<T>& targets,
                                   T positive_weight = T{1});

/// Mean over the batch of -sum_j t_j log p_j with rows over the last axis.
template <typename T>
LossResult<T> categorical_cross_entropy(const BasicTensor<T>& predictions, const BasicTensor<T>& targets);

} // namespace bsid::nn
