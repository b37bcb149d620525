#include "bsid/nn/loss.hpp"

#include <algorithm>
#include <cmath>

namespace bsid::nn {
namespace {

template <typename T>
T clamp_probability(T p) {
    const auto lo = static_cast<T>(kProbabilityClamp);
    return std::clamp(p, lo, T{1} - lo);
}

template <typename T>
void check_shapes(const BasicTensor<T>& predictions, const BasicTensor<T>& targets) {
    if (predictions.shape() != targets.shape() || predictions.rank() == 0 || predictions.dim(0) == 0) {
        throw Error(ErrorCode::ShapeMismatch,
                    "loss: predictions " + shape_string(predictions.shape()) + " targets " + shape_string(targets.shape()));
    }
}

} // namespace

template <typename T>
LossResult<T> binary_cross_entropy(const BasicTensor<T>& predictions, const BasicTensor<T>& targets,
                                   T positive_weight) {
    check_shapes(predictions, targets);
    const auto batch = static_cast<T>(predictions.dim(0));
    LossResult<T> result{T{0}, BasicTensor<T>(predictions.shape())};
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const T p = clamp_probability(predictions[i]);
        const T t = targets[i];
        result.value -= positive_weight * t * std::log(p) + (T{1} - t) * std::log(T{1} - p);
        result.grad[i] = -(positive_weight * t / p - (T{1} - t) / (T{1} - p)) / batch;
    }
    result.value /= batch;
    return result;
}

template <typename T>
LossResult<T> categorical_cross_entropy(const BasicTensor<T>& predictions, const BasicTensor<T>& targets) {
    check_shapes(predictions, targets);
    const auto batch = static_cast<T>(predictions.dim(0));
    LossResult<T> result{T{0}, BasicTensor<T>(predictions.shape())};
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const T p = clamp_probability(predictions[i]);
        const T t = targets[i];
        result.value -= t * std::log(p);
        result.grad[i] = -t / p / batch;
    }
    result.value /= batch;
    return result;
}

template LossResult<float> binary_cross_entropy(const Tensor&, const Tensor&, float);
template LossResult<double> binary_cross_entropy(const TensorD&, const TensorD&, double);
template LossResult<float> categorical_cross_entropy(const Tensor&, const Tensor&);
template LossResult<double> categorical_cross_entropy(const TensorD&, const TensorD&);

} // namespace bsid::nn
