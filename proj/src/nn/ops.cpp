#include "bsid/nn/ops.hpp"

#include <algorithm>
#include <cmath>
#include <type_traits>

#include "bsid/simd/kernels.hpp"

namespace bsid::nn {

std::string shape_string(const Shape& shape) {
    std::string out = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i > 0) {
            out += ", ";
        }
        out += std::to_string(shape[i]);
    }
    return out + "]";
}

namespace ops {
namespace {

using simd::Trans;

// C (+)= op(A) * op(B). Float goes through the dispatched kernels; double
// (gradient checks only) uses plain loops.
template <typename T>
void gemm(Trans ta, Trans tb, std::size_t m, std::size_t n, std::size_t k, const T* a, std::size_t lda, const T* b,
          std::size_t ldb, T* c, std::size_t ldc, bool accumulate) {
    if constexpr (std::is_same_v<T, float>) {
        simd::gemm(ta, tb, m, n, k, a, lda, b, ldb, c, ldc, accumulate);
    } else {
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                T sum = accumulate ? c[i * ldc + j] : T{0};
                for (std::size_t p = 0; p < k; ++p) {
                    const T av = ta == Trans::No ? a[i * lda + p] : a[p * lda + i];
                    const T bv = tb == Trans::No ? b[p * ldb + j] : b[j * ldb + p];
                    sum += av * bv;
                }
                c[i * ldc + j] = sum;
            }
        }
    }
}

void require(bool ok, ErrorCode code, const std::string& what) {
    if (!ok) {
        throw Error(code, what);
    }
}

struct ConvGeometry {
    std::size_t batch, height, width, in_channels, out_channels, stride;
    std::size_t out_height, out_width, pad_top, pad_left;

    std::size_t patch() const { return 9 * in_channels; }
    std::size_t rows() const { return batch * out_height * out_width; }
};

template <typename T>
ConvGeometry conv_geometry(const BasicTensor<T>& input, const BasicTensor<T>& weights, std::size_t stride) {
    require(input.rank() == 4, ErrorCode::ShapeMismatch, "conv2d input must be [batch, h, w, c], got " + shape_string(input.shape()));
    require(weights.rank() == 4 && weights.dim(0) == 3 && weights.dim(1) == 3, ErrorCode::ShapeMismatch,
            "conv2d weights must be [3, 3, c, k], got " + shape_string(weights.shape()));
    require(weights.dim(2) == input.dim(3), ErrorCode::ShapeMismatch,
            "conv2d channel mismatch: input " + shape_string(input.shape()) + " weights " + shape_string(weights.shape()));
    require(stride == 1 || stride == 2, ErrorCode::InvalidArgument, "conv2d stride must be 1 or 2");
    require(input.dim(1) >= 1 && input.dim(2) >= 1, ErrorCode::ShapeMismatch, "conv2d input spatial dims must be >= 1");
    ConvGeometry g{};
    g.batch = input.dim(0);
    g.height = input.dim(1);
    g.width = input.dim(2);
    g.in_channels = input.dim(3);
    g.out_channels = weights.dim(3);
    g.stride = stride;
    g.out_height = same_extent(g.height, stride);
    g.out_width = same_extent(g.width, stride);
    g.pad_top = same_pad_before(g.height, stride);
    g.pad_left = same_pad_before(g.width, stride);
    return g;
}

// Patch matrix: one row per output pixel, columns ordered [ky][kx][c] to match
// the weight layout.
template <typename T>
void im2col(const ConvGeometry& g, const T* input, T* cols) {
    const std::size_t c = g.in_channels;
    std::size_t row = 0;
    for (std::size_t b = 0; b < g.batch; ++b) {
        const T* image = input + b * g.height * g.width * c;
        for (std::size_t oy = 0; oy < g.out_height; ++oy) {
            for (std::size_t ox = 0; ox < g.out_width; ++ox, ++row) {
                T* dst = cols + row * g.patch();
                for (std::size_t ky = 0; ky < 3; ++ky) {
                    const auto iy = static_cast<std::ptrdiff_t>(oy * g.stride + ky) - static_cast<std::ptrdiff_t>(g.pad_top);
                    for (std::size_t kx = 0; kx < 3; ++kx, dst += c) {
                        const auto ix =
                            static_cast<std::ptrdiff_t>(ox * g.stride + kx) - static_cast<std::ptrdiff_t>(g.pad_left);
                        if (iy < 0 || ix < 0 || iy >= static_cast<std::ptrdiff_t>(g.height) ||
                            ix >= static_cast<std::ptrdiff_t>(g.width)) {
                            std::fill_n(dst, c, T{0});
                        } else {
                            std::copy_n(image + (static_cast<std::size_t>(iy) * g.width + static_cast<std::size_t>(ix)) * c, c,
                                        dst);
                        }
                    }
                }
            }
        }
    }
}

template <typename T>
void col2im_accumulate(const ConvGeometry& g, const T* cols, T* input_grad) {
    const std::size_t c = g.in_channels;
    std::size_t row = 0;
    for (std::size_t b = 0; b < g.batch; ++b) {
        T* image = input_grad + b * g.height * g.width * c;
        for (std::size_t oy = 0; oy < g.out_height; ++oy) {
            for (std::size_t ox = 0; ox < g.out_width; ++ox, ++row) {
                const T* src = cols + row * g.patch();
                for (std::size_t ky = 0; ky < 3; ++ky) {
                    const auto iy = static_cast<std::ptrdiff_t>(oy * g.stride + ky) - static_cast<std::ptrdiff_t>(g.pad_top);
                    for (std::size_t kx = 0; kx < 3; ++kx, src += c) {
                        const auto ix =
                            static_cast<std::ptrdiff_t>(ox * g.stride + kx) - static_cast<std::ptrdiff_t>(g.pad_left);
                        if (iy < 0 || ix < 0 || iy >= static_cast<std::ptrdiff_t>(g.height) ||
                            ix >= static_cast<std::ptrdiff_t>(g.width)) {
                            continue;
                        }
                        T* dst = image + (static_cast<std::size_t>(iy) * g.width + static_cast<std::size_t>(ix)) * c;
                        for (std::size_t ch = 0; ch < c; ++ch) {
                            dst[ch] += src[ch];
                        }
                    }
                }
            }
        }
    }
}

std::size_t last_dim(const Shape& shape) { return shape.empty() ? 0 : shape.back(); }

void require_same_shape(const Shape& a, const Shape& b, const char* op) {
    require(a == b, ErrorCode::ShapeMismatch, std::string(op) + ": " + shape_string(a) + " vs " + shape_string(b));
}

template <typename T>
void store_affine_grads(const std::vector<double>& sum_dy, const std::vector<double>& sum_dy_xhat, const Shape& shape,
                        BasicTensor<T>* gamma_grad, BasicTensor<T>* beta_grad) {
    if (gamma_grad != nullptr) {
        *gamma_grad = BasicTensor<T>(shape);
        for (std::size_t c = 0; c < sum_dy_xhat.size(); ++c) {
            (*gamma_grad)[c] = static_cast<T>(sum_dy_xhat[c]);
        }
    }
    if (beta_grad != nullptr) {
        *beta_grad = BasicTensor<T>(shape);
        for (std::size_t c = 0; c < sum_dy.size(); ++c) {
            (*beta_grad)[c] = static_cast<T>(sum_dy[c]);
        }
    }
}

// Samples per im2col chunk, sized so the patch matrix stays in cache.
std::size_t chunk_samples(const ConvGeometry& g) {
    constexpr std::size_t kTargetRows = 512;
    return std::max<std::size_t>(1, kTargetRows / (g.out_height * g.out_width));
}

template <typename T>
std::vector<T>& scratch(std::size_t n) {
    thread_local std::vector<T> buf;
    if (buf.size() < n) {
        buf.resize(n);
    }
    return buf;
}

} // namespace

template <typename T>
BasicTensor<T> conv2d_forward(const BasicTensor<T>& input, const BasicTensor<T>& weights, const BasicTensor<T>& bias,
                              std::size_t stride) {
    const ConvGeometry g = conv_geometry(input, weights, stride);
    require(bias.size() == g.out_channels, ErrorCode::ShapeMismatch, "conv2d bias length mismatch");
    BasicTensor<T> out({g.batch, g.out_height, g.out_width, g.out_channels});
    T* o = out.data();
    for (std::size_t r = 0; r < g.rows(); ++r) {
        std::copy_n(bias.data(), g.out_channels, o + r * g.out_channels);
    }
    const std::size_t per = chunk_samples(g);
    const std::size_t in_stride = g.height * g.width * g.in_channels;
    const std::size_t pixels = g.out_height * g.out_width;
    T* cols = scratch<T>(per * pixels * g.patch()).data();
    for (std::size_t b0 = 0; b0 < g.batch; b0 += per) {
        ConvGeometry part = g;
        part.batch = std::min(per, g.batch - b0);
        im2col(part, input.data() + b0 * in_stride, cols);
        gemm<T>(Trans::No, Trans::No, part.rows(), g.out_channels, g.patch(), cols, g.patch(), weights.data(),
                g.out_channels, o + b0 * pixels * g.out_channels, g.out_channels, true);
    }
    return out;
}

template <typename T>
void conv2d_backward(const BasicTensor<T>& upstream, const BasicTensor<T>& input, const BasicTensor<T>& weights,
                     std::size_t stride, BasicTensor<T>* input_grad, BasicTensor<T>* weight_grad,
                     BasicTensor<T>* bias_grad) {
    const ConvGeometry g = conv_geometry(input, weights, stride);
    require(upstream.shape() == Shape{g.batch, g.out_height, g.out_width, g.out_channels}, ErrorCode::ShapeMismatch,
            "conv2d upstream gradient has shape " + shape_string(upstream.shape()));

    if (bias_grad != nullptr) {
        *bias_grad = BasicTensor<T>(Shape{g.out_channels});
        for (std::size_t r = 0; r < g.rows(); ++r) {
            const T* u = upstream.data() + r * g.out_channels;
            for (std::size_t k = 0; k < g.out_channels; ++k) {
                (*bias_grad)[k] += u[k];
            }
        }
    }
    if (weight_grad == nullptr && input_grad == nullptr) {
        return;
    }
    if (weight_grad != nullptr) {
        *weight_grad = BasicTensor<T>(weights.shape());
    }
    if (input_grad != nullptr) {
        *input_grad = BasicTensor<T>(input.shape());
    }

    const std::size_t per = chunk_samples(g);
    const std::size_t in_stride = g.height * g.width * g.in_channels;
    const std::size_t pixels = g.out_height * g.out_width;
    T* cols = scratch<T>(per * pixels * g.patch()).data();
    for (std::size_t b0 = 0; b0 < g.batch; b0 += per) {
        ConvGeometry part = g;
        part.batch = std::min(per, g.batch - b0);
        const T* up = upstream.data() + b0 * pixels * g.out_channels;
        if (weight_grad != nullptr) {
            im2col(part, input.data() + b0 * in_stride, cols);
            gemm<T>(Trans::Yes, Trans::No, g.patch(), g.out_channels, part.rows(), cols, g.patch(), up,
                    g.out_channels, weight_grad->data(), g.out_channels, b0 > 0);
        }
        if (input_grad != nullptr) {
            gemm<T>(Trans::No, Trans::Yes, part.rows(), g.patch(), g.out_channels, up, g.out_channels,
                    weights.data(), g.out_channels, cols, g.patch(), false);
            col2im_accumulate(part, cols, input_grad->data() + b0 * in_stride);
        }
    }
}

template <typename T>
BasicTensor<T> batchnorm_forward_train(const BasicTensor<T>& input, const BasicTensor<T>& gamma,
                                       const BasicTensor<T>& beta, T epsilon, T momentum, BasicTensor<T>& running_mean,
                                       BasicTensor<T>& running_var, BatchNormCache<T>& cache) {
    const std::size_t channels = last_dim(input.shape());
    require(input.rank() >= 2 && input.dim(0) >= 2, ErrorCode::BatchTooSmall,
            "batchnorm in train mode needs a batch of at least 2");
    require(gamma.size() == channels && beta.size() == channels && running_mean.size() == channels &&
                running_var.size() == channels,
            ErrorCode::ShapeMismatch, "batchnorm parameter length mismatch");
    const std::size_t count = input.size() / channels;
    std::vector<double> mean(channels, 0.0);
    std::vector<double> var(channels, 0.0);
    const T* x = input.data();
    for (std::size_t i = 0; i < count; ++i) {
        for (std::size_t c = 0; c < channels; ++c) {
            mean[c] += x[i * channels + c];
        }
    }
    for (auto& m : mean) {
        m /= static_cast<double>(count);
    }
    for (std::size_t i = 0; i < count; ++i) {
        for (std::size_t c = 0; c < channels; ++c) {
            const double d = x[i * channels + c] - mean[c];
            var[c] += d * d;
        }
    }
    cache.inv_std.assign(channels, T{0});
    for (std::size_t c = 0; c < channels; ++c) {
        var[c] /= static_cast<double>(count);
        cache.inv_std[c] = static_cast<T>(1.0 / std::sqrt(var[c] + static_cast<double>(epsilon)));
        running_mean[c] = momentum * running_mean[c] + (T{1} - momentum) * static_cast<T>(mean[c]);
        running_var[c] = momentum * running_var[c] + (T{1} - momentum) * static_cast<T>(var[c]);
    }
    cache.normalized = BasicTensor<T>(input.shape());
    BasicTensor<T> out(input.shape());
    T* xhat = cache.normalized.data();
    T* y = out.data();
    for (std::size_t i = 0; i < count; ++i) {
        for (std::size_t c = 0; c < channels; ++c) {
            const std::size_t idx = i * channels + c;
            xhat[idx] = static_cast<T>((x[idx] - mean[c])) * cache.inv_std[c];
            y[idx] = gamma[c] * xhat[idx] + beta[c];
        }
    }
    return out;
}

template <typename T>
BasicTensor<T> batchnorm_forward_infer(const BasicTensor<T>& input, const BasicTensor<T>& gamma,
                                       const BasicTensor<T>& beta, const BasicTensor<T>& running_mean,
                                       const BasicTensor<T>& running_var, T epsilon, BatchNormCache<T>* cache) {
    const std::size_t channels = last_dim(input.shape());
    require(gamma.size() == channels && beta.size() == channels && running_mean.size() == channels &&
                running_var.size() == channels,
            ErrorCode::ShapeMismatch, "batchnorm parameter length mismatch");
    std::vector<T> scale(channels);
    std::vector<T> shift(channels);
    for (std::size_t c = 0; c < channels; ++c) {
        scale[c] = gamma[c] / std::sqrt(running_var[c] + epsilon);
        shift[c] = beta[c] - running_mean[c] * scale[c];
    }
    BasicTensor<T> out(input.shape());
    const std::size_t count = channels == 0 ? 0 : input.size() / channels;
    for (std::size_t i = 0; i < count; ++i) {
        for (std::size_t c = 0; c < channels; ++c) {
            out[i * channels + c] = input[i * channels + c] * scale[c] + shift[c];
        }
    }
    if (cache != nullptr) {
        // Only feeds the backward pass; the output above never depends on it.
        cache->inv_std.resize(channels);
        for (std::size_t c = 0; c < channels; ++c) {
            cache->inv_std[c] = T{1} / std::sqrt(running_var[c] + epsilon);
        }
        cache->normalized = BasicTensor<T>(input.shape());
        for (std::size_t i = 0; i < count; ++i) {
            for (std::size_t c = 0; c < channels; ++c) {
                cache->normalized[i * channels + c] = (input[i * channels + c] - running_mean[c]) * cache->inv_std[c];
            }
        }
    }
    return out;
}

template <typename T>
void batchnorm_backward(const BasicTensor<T>& upstream, const BatchNormCache<T>& cache, const BasicTensor<T>& gamma,
                        BasicTensor<T>* input_grad, BasicTensor<T>* gamma_grad, BasicTensor<T>* beta_grad) {
    require_same_shape(upstream.shape(), cache.normalized.shape(), "batchnorm backward");
    const std::size_t channels = gamma.size();
    const std::size_t count = upstream.size() / channels;
    std::vector<double> sum_dy(channels, 0.0);
    std::vector<double> sum_dy_xhat(channels, 0.0);
    const T* dy = upstream.data();
    const T* xhat = cache.normalized.data();
    for (std::size_t i = 0; i < count; ++i) {
        for (std::size_t c = 0; c < channels; ++c) {
            const std::size_t idx = i * channels + c;
            sum_dy[c] += dy[idx];
            sum_dy_xhat[c] += static_cast<double>(dy[idx]) * xhat[idx];
        }
    }
    store_affine_grads(sum_dy, sum_dy_xhat, gamma.shape(), gamma_grad, beta_grad);
    if (input_grad == nullptr) {
        return;
    }
    *input_grad = BasicTensor<T>(upstream.shape());
    T* dx = input_grad->data();
    const double n = static_cast<double>(count);
    for (std::size_t i = 0; i < count; ++i) {
        for (std::size_t c = 0; c < channels; ++c) {
            const std::size_t idx = i * channels + c;
            const double g = static_cast<double>(gamma[c]) * cache.inv_std[c] / n;
            dx[idx] = static_cast<T>(g * (n * dy[idx] - sum_dy[c] - xhat[idx] * sum_dy_xhat[c]));
        }
    }
}

template <typename T>
void batchnorm_backward_infer(const BasicTensor<T>& upstream, const BatchNormCache<T>& cache,
                              const BasicTensor<T>& gamma, BasicTensor<T>* input_grad, BasicTensor<T>* gamma_grad,
                              BasicTensor<T>* beta_grad) {
    require_same_shape(upstream.shape(), cache.normalized.shape(), "batchnorm backward");
    const std::size_t channels = gamma.size();
    const std::size_t count = upstream.size() / channels;
    if (gamma_grad != nullptr || beta_grad != nullptr) {
        std::vector<double> sum_dy(channels, 0.0);
        std::vector<double> sum_dy_xhat(channels, 0.0);
        for (std::size_t i = 0; i < count; ++i) {
            for (std::size_t c = 0; c < channels; ++c) {
                const std::size_t idx = i * channels + c;
                sum_dy[c] += upstream[idx];
                sum_dy_xhat[c] += static_cast<double>(upstream[idx]) * cache.normalized[idx];
            }
        }
        store_affine_grads(sum_dy, sum_dy_xhat, gamma.shape(), gamma_grad, beta_grad);
    }
    if (input_grad != nullptr) {
        *input_grad = BasicTensor<T>(upstream.shape());
        for (std::size_t i = 0; i < count; ++i) {
            for (std::size_t c = 0; c < channels; ++c) {
                const std::size_t idx = i * channels + c;
                (*input_grad)[idx] = upstream[idx] * gamma[c] * cache.inv_std[c];
            }
        }
    }
}

template <typename T>
BasicTensor<T> dense_forward(const BasicTensor<T>& input, const BasicTensor<T>& weights, const BasicTensor<T>& bias) {
    require(input.rank() == 2 && weights.rank() == 2 && input.dim(1) == weights.dim(0), ErrorCode::ShapeMismatch,
            "dense: input " + shape_string(input.shape()) + " weights " + shape_string(weights.shape()));
    const std::size_t batch = input.dim(0);
    const std::size_t in = weights.dim(0);
    const std::size_t out_units = weights.dim(1);
    require(bias.size() == out_units, ErrorCode::ShapeMismatch, "dense bias length mismatch");
    BasicTensor<T> out({batch, out_units});
    for (std::size_t b = 0; b < batch; ++b) {
        std::copy_n(bias.data(), out_units, out.data() + b * out_units);
    }
    gemm<T>(Trans::No, Trans::No, batch, out_units, in, input.data(), in, weights.data(), out_units, out.data(),
            out_units, true);
    return out;
}

template <typename T>
void dense_backward(const BasicTensor<T>& upstream, const BasicTensor<T>& input, const BasicTensor<T>& weights,
                    BasicTensor<T>* input_grad, BasicTensor<T>* weight_grad, BasicTensor<T>* bias_grad) {
    const std::size_t batch = input.dim(0);
    const std::size_t in = weights.dim(0);
    const std::size_t out_units = weights.dim(1);
    require(upstream.shape() == Shape{batch, out_units}, ErrorCode::ShapeMismatch,
            "dense upstream gradient has shape " + shape_string(upstream.shape()));
    if (weight_grad != nullptr) {
        *weight_grad = BasicTensor<T>(weights.shape());
        gemm<T>(Trans::Yes, Trans::No, in, out_units, batch, input.data(), in, upstream.data(), out_units,
                weight_grad->data(), out_units, false);
    }
    if (bias_grad != nullptr) {
        *bias_grad = BasicTensor<T>(Shape{out_units});
        for (std::size_t b = 0; b < batch; ++b) {
            for (std::size_t o = 0; o < out_units; ++o) {
                (*bias_grad)[o] += upstream[b * out_units + o];
            }
        }
    }
    if (input_grad != nullptr) {
        *input_grad = BasicTensor<T>(input.shape());
        gemm<T>(Trans::No, Trans::Yes, batch, in, out_units, upstream.data(), out_units, weights.data(), out_units,
                input_grad->data(), in, false);
    }
}

template <typename T>
BasicTensor<T> relu_forward(const BasicTensor<T>& input) {
    BasicTensor<T> out(input.shape());
    if constexpr (std::is_same_v<T, float>) {
        simd::active().relu_forward(input.data(), out.data(), input.size());
    } else {
        for (std::size_t i = 0; i < input.size(); ++i) {
            out[i] = input[i] > T{0} ? input[i] : T{0};
        }
    }
    return out;
}

template <typename T>
BasicTensor<T> relu_backward(const BasicTensor<T>& upstream, const BasicTensor<T>& output) {
    require_same_shape(upstream.shape(), output.shape(), "relu backward");
    BasicTensor<T> grad(output.shape());
    if constexpr (std::is_same_v<T, float>) {
        simd::active().relu_backward(output.data(), upstream.data(), grad.data(), output.size());
    } else {
        for (std::size_t i = 0; i < output.size(); ++i) {
            grad[i] = output[i] > T{0} ? upstream[i] : T{0};
        }
    }
    return grad;
}

template <typename T>
BasicTensor<T> sigmoid_forward(const BasicTensor<T>& input) {
    BasicTensor<T> out(input.shape());
    for (std::size_t i = 0; i < input.size(); ++i) {
        const T x = input[i];
        if (x >= T{0}) {
            out[i] = T{1} / (T{1} + std::exp(-x));
        } else {
            const T e = std::exp(x);
            out[i] = e / (T{1} + e);
        }
    }
    return out;
}

template <typename T>
BasicTensor<T> sigmoid_backward(const BasicTensor<T>& upstream, const BasicTensor<T>& output) {
    require_same_shape(upstream.shape(), output.shape(), "sigmoid backward");
    BasicTensor<T> grad(output.shape());
    for (std::size_t i = 0; i < output.size(); ++i) {
        grad[i] = upstream[i] * output[i] * (T{1} - output[i]);
    }
    return grad;
}

template <typename T>
BasicTensor<T> softmax_forward(const BasicTensor<T>& input) {
    const std::size_t width = last_dim(input.shape());
    require(width > 0, ErrorCode::ShapeMismatch, "softmax over an empty axis");
    BasicTensor<T> out(input.shape());
    for (std::size_t r = 0; r < input.size() / width; ++r) {
        const T* x = input.data() + r * width;
        T* y = out.data() + r * width;
        const T peak = *std::max_element(x, x + width);
        T total{0};
        for (std::size_t j = 0; j < width; ++j) {
            y[j] = std::exp(x[j] - peak);
            total += y[j];
        }
        for (std::size_t j = 0; j < width; ++j) {
            y[j] /= total;
        }
    }
    return out;
}

template <typename T>
BasicTensor<T> softmax_backward(const BasicTensor<T>& upstream, const BasicTensor<T>& output) {
    require_same_shape(upstream.shape(), output.shape(), "softmax backward");
    const std::size_t width = last_dim(output.shape());
    BasicTensor<T> grad(output.shape());
    for (std::size_t r = 0; r < output.size() / width; ++r) {
        const T* y = output.data() + r * width;
        const T* g = upstream.data() + r * width;
        T dot{0};
        for (std::size_t j = 0; j < width; ++j) {
            dot += g[j] * y[j];
        }
        for (std::size_t j = 0; j < width; ++j) {
            grad[r * width + j] = y[j] * (g[j] - dot);
        }
    }
    return grad;
}

template <typename T>
BasicTensor<T> dropout_forward(const BasicTensor<T>& input, std::span<const T> mask) {
    require(mask.size() == input.size(), ErrorCode::ShapeMismatch, "dropout mask length mismatch");
    BasicTensor<T> out(input.shape());
    for (std::size_t i = 0; i < input.size(); ++i) {
        out[i] = input[i] * mask[i];
    }
    return out;
}

template <typename T>
BasicTensor<T> dropout_backward(const BasicTensor<T>& upstream, std::span<const T> mask) {
    return dropout_forward(upstream, mask);
}

template <typename T>
BasicTensor<T> concat_channels_forward(std::span<const BasicTensor<T>* const> inputs) {
    require(!inputs.empty(), ErrorCode::ShapeMismatch, "concat of zero operands");
    const Shape& first = inputs.front()->shape();
    require(!first.empty(), ErrorCode::ShapeMismatch, "concat of scalars");
    std::size_t total = 0;
    for (const auto* t : inputs) {
        const Shape& s = t->shape();
        const bool leading_match =
            s.size() == first.size() && std::equal(s.begin(), s.end() - 1, first.begin(), first.end() - 1);
        if (!leading_match) {
            throw Error(s.size() == first.size() ? ErrorCode::ConcatSpatialMismatch : ErrorCode::ShapeMismatch,
                        "concat operands " + shape_string(first) + " and " + shape_string(s));
        }
        total += s.back();
    }
    Shape out_shape = first;
    out_shape.back() = total;
    BasicTensor<T> out(out_shape);
    const std::size_t positions = out.size() / total;
    std::size_t offset = 0;
    for (const auto* t : inputs) {
        const std::size_t c = t->shape().back();
        for (std::size_t p = 0; p < positions; ++p) {
            std::copy_n(t->data() + p * c, c, out.data() + p * total + offset);
        }
        offset += c;
    }
    return out;
}

template <typename T>
std::vector<BasicTensor<T>> concat_channels_backward(const BasicTensor<T>& upstream,
                                                     std::span<const std::size_t> channel_counts) {
    std::size_t total = 0;
    for (std::size_t c : channel_counts) {
        total += c;
    }
    require(!upstream.shape().empty() && upstream.shape().back() == total, ErrorCode::ShapeMismatch,
            "concat backward width mismatch");
    const std::size_t positions = upstream.size() / total;
    std::vector<BasicTensor<T>> grads;
    std::size_t offset = 0;
    for (std::size_t c : channel_counts) {
        Shape s = upstream.shape();
        s.back() = c;
        BasicTensor<T> g(s);
        for (std::size_t p = 0; p < positions; ++p) {
            std::copy_n(upstream.data() + p * total + offset, c, g.data() + p * c);
        }
        offset += c;
        grads.push_back(std::move(g));
    }
    return grads;
}

#define BSID_INSTANTIATE_OPS(T)                                                                                       \
    template BasicTensor<T> conv2d_forward(const BasicTensor<T>&, const BasicTensor<T>&, const BasicTensor<T>&,      \
                                           std::size_t);                                                             \
    template void conv2d_backward(const BasicTensor<T>&, const BasicTensor<T>&, const BasicTensor<T>&, std::size_t,  \
                                  BasicTensor<T>*, BasicTensor<T>*, BasicTensor<T>*);                                 \
    template BasicTensor<T> batchnorm_forward_train(const BasicTensor<T>&, const BasicTensor<T>&,                    \
                                                    const BasicTensor<T>&, T, T, BasicTensor<T>&, BasicTensor<T>&,   \
                                                    BatchNormCache<T>&);                                             \
    template BasicTensor<T> batchnorm_forward_infer(const BasicTensor<T>&, const BasicTensor<T>&,                    \
                                                    const BasicTensor<T>&, const BasicTensor<T>&,                    \
                                                    const BasicTensor<T>&, T, BatchNormCache<T>*);                   \
    template void batchnorm_backward(const BasicTensor<T>&, const BatchNormCache<T>&, const BasicTensor<T>&,         \
                                     BasicTensor<T>*, BasicTensor<T>*, BasicTensor<T>*);                              \
    template void batchnorm_backward_infer(const BasicTensor<T>&, const BatchNormCache<T>&, const BasicTensor<T>&,   \
                                           BasicTensor<T>*, BasicTensor<T>*, BasicTensor<T>*);                        \
    template BasicTensor<T> dense_forward(const BasicTensor<T>&, const BasicTensor<T>&, const BasicTensor<T>&);      \
    template void dense_backward(const BasicTensor<T>&, const BasicTensor<T>&, const BasicTensor<T>&,                \
                                 BasicTensor<T>*, BasicTensor<T>*, BasicTensor<T>*);                                  \
    template BasicTensor<T> relu_forward(const BasicTensor<T>&);                                                     \
    template BasicTensor<T> relu_backward(const BasicTensor<T>&, const BasicTensor<T>&);                             \
    template BasicTensor<T> sigmoid_forward(const BasicTensor<T>&);                                                  \
    template BasicTensor<T> sigmoid_backward(const BasicTensor<T>&, const BasicTensor<T>&);                          \
    template BasicTensor<T> softmax_forward(const BasicTensor<T>&);                                                  \
    template BasicTensor<T> softmax_backward(const BasicTensor<T>&, const BasicTensor<T>&);                          \
    template BasicTensor<T> dropout_forward(const BasicTensor<T>&, std::span<const T>);                              \
    template BasicTensor<T> dropout_backward(const BasicTensor<T>&, std::span<const T>);                             \
    template BasicTensor<T> concat_channels_forward(std::span<const BasicTensor<T>* const>);                         \
    template std::vector<BasicTensor<T>> concat_channels_backward(const BasicTensor<T>&, std::span<const std::size_t>);

BSID_INSTANTIATE_OPS(float)
BSID_INSTANTIATE_OPS(double)

#undef BSID_INSTANTIATE_OPS

} // namespace ops
} // namespace bsid::nn
