#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "bsid/error.hpp"

namespace bsid::nn {

using Shape = std::vector<std::size_t>;

inline std::size_t element_count(const Shape& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(const Shape& shape);

/// Dense row-major array. Batched activations use a leading batch axis and
/// channels-last layout: [batch, height, width, channels] or [batch, features].
template <typename T>
class BasicTensor {
public:
    using value_type = T;

    BasicTensor() = default;

    explicit BasicTensor(Shape shape, T fill = T{}) : shape_(std::move(shape)), data_(element_count(shape_), fill) {}

    BasicTensor(Shape shape, std::vector<T> data) : shape_(std::move(shape)), data_(std::move(data)) {
        if (data_.size() != element_count(shape_)) {
            throw Error(ErrorCode::ShapeMismatch,
                        "data length " + std::to_string(data_.size()) + " does not fit " + shape_string(shape_));
        }
    }

    const Shape& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }
    std::span<T> values() { return data_; }
    std::span<const T> values() const { return data_; }

    T& operator[](std::size_t i) { return data_[i]; }
    const T& operator[](std::size_t i) const { return data_[i]; }

    /// Same data, different shape with equal element count.
    void reshape(Shape shape) {
        if (element_count(shape) != data_.size()) {
            throw Error(ErrorCode::ShapeMismatch, "cannot reshape " + shape_string(shape_) + " to " + shape_string(shape));
        }
        shape_ = std::move(shape);
    }

    void fill(T value) { std::fill(data_.begin(), data_.end(), value); }

    /// Elements per leading-axis slice.
    std::size_t stride0() const { return shape_.empty() || shape_[0] == 0 ? 0 : data_.size() / shape_[0]; }

    bool operator==(const BasicTensor&) const = default;

    template <typename U>
    BasicTensor<U> cast() const {
        return BasicTensor<U>(shape_, std::vector<U>(data_.begin(), data_.end()));
    }

private:
    Shape shape_;
    std::vector<T> data_;
};

using Tensor = BasicTensor<float>;
using TensorD = BasicTensor<double>;

/// Rows [begin, begin + count) along the leading axis.
template <typename T>
BasicTensor<T> slice_rows(const BasicTensor<T>& t, std::size_t begin, std::size_t count) {
    Shape shape = t.shape();
    shape[0] = count;
    const std::size_t stride = t.stride0();
    std::vector<T> data(t.data() + begin * stride, t.data() + (begin + count) * stride);
    return BasicTensor<T>(std::move(shape), std::move(data));
}

/// Gathers the given rows along the leading axis, in order.
template <typename T>
BasicTensor<T> gather_rows(const BasicTensor<T>& t, std::span<const std::size_t> rows) {
    Shape shape = t.shape();
    shape[0] = rows.size();
    const std::size_t stride = t.stride0();
    std::vector<T> data;
    data.reserve(rows.size() * stride);
    for (std::size_t r : rows) {
        data.insert(data.end(), t.data() + r * stride, t.data() + (r + 1) * stride);
    }
    return BasicTensor<T>(std::move(shape), std::move(data));
}

} // namespace bsid::nn
