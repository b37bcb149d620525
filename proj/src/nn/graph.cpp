#include "bsid/nn/graph.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "bsid/util/random.hpp"

namespace bsid::nn {

std::string_view to_string(LayerKind kind) {
    switch (kind) {
    case LayerKind::Conv2D: return "conv2d";
    case LayerKind::BatchNorm: return "batchnorm";
    case LayerKind::ReLU: return "relu";
    case LayerKind::Dense: return "dense";
    case LayerKind::Dropout: return "dropout";
    case LayerKind::Flatten: return "flatten";
    case LayerKind::ConcatChannels: return "concat_channels";
    case LayerKind::Sigmoid: return "sigmoid";
    case LayerKind::Softmax: return "softmax";
    }
    return "unknown";
}

void LayerSpec::validate() const {
    auto fail = [this](const std::string& what) {
        throw Error(ErrorCode::InvalidArgument, std::string(to_string(kind)) + ": " + what);
    };
    switch (kind) {
    case LayerKind::Conv2D:
        if (units == 0) fail("out_channels must be positive");
        if (stride != 1 && stride != 2) fail("stride must be 1 or 2");
        break;
    case LayerKind::Dense:
        if (units == 0) fail("out_units must be positive");
        break;
    case LayerKind::Dropout:
        if (!(rate >= 0.0f && rate < 1.0f)) fail("rate must be in [0, 1)");
        break;
    case LayerKind::BatchNorm:
        if (!(epsilon > 0.0f)) fail("epsilon must be positive");
        if (!(momentum >= 0.0f && momentum <= 1.0f)) fail("momentum must be in [0, 1]");
        break;
    case LayerKind::ReLU:
    case LayerKind::Flatten:
    case LayerKind::ConcatChannels:
    case LayerKind::Sigmoid:
    case LayerKind::Softmax:
        break;
    default:
        fail("unknown layer kind");
    }
}

namespace {

std::string_view role_suffix(ParamRole role) {
    switch (role) {
    case ParamRole::Weight: return "weight";
    case ParamRole::Bias: return "bias";
    case ParamRole::Gamma: return "gamma";
    case ParamRole::Beta: return "beta";
    case ParamRole::RunningMean: return "running_mean";
    case ParamRole::RunningVar: return "running_var";
    }
    return "param";
}

template <typename T>
BasicTensor<T> he_uniform(Shape shape, std::size_t fan_in, Rng& rng) {
    BasicTensor<T> t(std::move(shape));
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
    for (auto& v : t.values()) {
        v = static_cast<T>((rng.uniform() * 2.0 - 1.0) * limit);
    }
    return t;
}

Shape batched(std::size_t batch, const Shape& sample) {
    Shape s;
    s.reserve(sample.size() + 1);
    s.push_back(batch);
    s.insert(s.end(), sample.begin(), sample.end());
    return s;
}

std::string strip(std::string_view name, std::string_view prefix) {
    if (!prefix.empty() && name.substr(0, prefix.size()) == prefix) {
        name.remove_prefix(prefix.size());
    }
    return std::string(name);
}

template <typename T>
void accumulate_into(BasicTensor<T>& dst, BasicTensor<T>&& src) {
    if (dst.empty()) {
        dst = std::move(src);
        return;
    }
    for (std::size_t i = 0; i < dst.size(); ++i) {
        dst[i] += src[i];
    }
}

} // namespace

template <typename T>
BasicGraph<T>::BasicGraph(Shape input_shape, std::uint64_t seed) : input_shape_(std::move(input_shape)), seed_(seed) {
    if (input_shape_.empty() || element_count(input_shape_) == 0) {
        throw Error(ErrorCode::ShapeMismatch, "graph input shape must be non-empty, got " + shape_string(input_shape_));
    }
}

template <typename T>
std::size_t BasicGraph<T>::add_param(const std::string& node_name, ParamRole role, BasicTensor<T> value,
                                     bool trainable) {
    params_.push_back({node_name + "/" + std::string(role_suffix(role)), role, std::move(value), trainable});
    return params_.size() - 1;
}

template <typename T>
int BasicGraph<T>::add(std::string name, const LayerSpec& spec, std::vector<int> inputs) {
    spec.validate();
    const int id = static_cast<int>(nodes_.size());
    if (inputs.empty()) {
        throw Error(ErrorCode::InvalidArgument, name + ": node needs at least one input");
    }
    if (spec.kind != LayerKind::ConcatChannels && inputs.size() != 1) {
        throw Error(ErrorCode::InvalidArgument, name + ": only concat_channels accepts several inputs");
    }
    for (int in : inputs) {
        if (in < kGraphInput || in >= id) {
            throw Error(ErrorCode::InvalidArgument, name + ": input " + std::to_string(in) + " does not precede it");
        }
    }
    if (find(name) >= 0) {
        throw Error(ErrorCode::InvalidArgument, "duplicate node name " + name);
    }

    Node node{std::move(name), spec, std::move(inputs), {}, {}, false};
    const Shape& in_shape = shape_of(node.inputs.front());
    Rng rng(derive_seed(seed_, static_cast<std::uint64_t>(id)));

    switch (spec.kind) {
    case LayerKind::Conv2D: {
        if (in_shape.size() != 3) {
            throw Error(ErrorCode::ShapeMismatch, node.name + ": conv2d needs [h, w, c] input, got " + shape_string(in_shape));
        }
        const std::size_t c = in_shape[2];
        node.output_shape = {ops::same_extent(in_shape[0], spec.stride), ops::same_extent(in_shape[1], spec.stride),
                             spec.units};
        node.params.push_back(add_param(node.name, ParamRole::Weight, he_uniform<T>({3, 3, c, spec.units}, 9 * c, rng), true));
        node.params.push_back(add_param(node.name, ParamRole::Bias, BasicTensor<T>(Shape{spec.units}), true));
        break;
    }
    case LayerKind::Dense: {
        if (in_shape.size() != 1) {
            throw Error(ErrorCode::ShapeMismatch, node.name + ": dense needs flat input, got " + shape_string(in_shape));
        }
        node.output_shape = {spec.units};
        node.params.push_back(
            add_param(node.name, ParamRole::Weight, he_uniform<T>({in_shape[0], spec.units}, in_shape[0], rng), true));
        node.params.push_back(add_param(node.name, ParamRole::Bias, BasicTensor<T>(Shape{spec.units}), true));
        break;
    }
    case LayerKind::BatchNorm: {
        const Shape channels{in_shape.back()};
        node.output_shape = in_shape;
        node.params.push_back(add_param(node.name, ParamRole::Gamma, BasicTensor<T>(channels, T{1}), true));
        node.params.push_back(add_param(node.name, ParamRole::Beta, BasicTensor<T>(channels), true));
        node.params.push_back(add_param(node.name, ParamRole::RunningMean, BasicTensor<T>(channels), false));
        node.params.push_back(add_param(node.name, ParamRole::RunningVar, BasicTensor<T>(channels, T{1}), false));
        break;
    }
    case LayerKind::Flatten:
        node.output_shape = {element_count(in_shape)};
        break;
    case LayerKind::ConcatChannels: {
        Shape out = in_shape;
        out.back() = 0;
        for (int in : node.inputs) {
            const Shape& s = shape_of(in);
            if (s.size() != in_shape.size() || !std::equal(s.begin(), s.end() - 1, in_shape.begin())) {
                throw Error(ErrorCode::ConcatSpatialMismatch,
                            node.name + ": cannot concat " + shape_string(in_shape) + " with " + shape_string(s));
            }
            out.back() += s.back();
        }
        node.output_shape = std::move(out);
        break;
    }
    case LayerKind::ReLU:
    case LayerKind::Dropout:
    case LayerKind::Sigmoid:
    case LayerKind::Softmax:
        node.output_shape = in_shape;
        break;
    }
    nodes_.push_back(std::move(node));
    output_ = id;
    return id;
}

template <typename T>
void BasicGraph<T>::set_output(int node) {
    if (node < 0 || node >= static_cast<int>(nodes_.size())) {
        throw Error(ErrorCode::InvalidArgument, "output node out of range");
    }
    output_ = node;
}

template <typename T>
const Shape& BasicGraph<T>::output_shape() const {
    return shape_of(output_);
}

template <typename T>
const Shape& BasicGraph<T>::shape_of(int node) const {
    return node == kGraphInput ? input_shape_ : nodes_.at(static_cast<std::size_t>(node)).output_shape;
}

template <typename T>
int BasicGraph<T>::find(std::string_view name) const {
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (nodes_[i].name == name) {
            return static_cast<int>(i);
        }
    }
    return -1;
}

template <typename T>
std::size_t BasicGraph<T>::parameter_count(bool trainable_only) const {
    std::size_t total = 0;
    for (const auto& p : params_) {
        if (!p.is_statistic() && (!trainable_only || p.trainable)) {
            total += p.value.size();
        }
    }
    return total;
}

template <typename T>
void BasicGraph<T>::set_trainable(bool trainable) {
    for (auto& p : params_) {
        p.trainable = trainable && !p.is_statistic();
    }
}

template <typename T>
void BasicGraph<T>::pin_infer(bool pinned) {
    for (auto& n : nodes_) {
        n.pinned_infer = pinned;
    }
}

template <typename T>
BasicTensor<T> BasicGraph<T>::run(const BasicTensor<T>& batch, Mode mode, ForwardCache<T>* cache,
                                  std::span<const Preset<T>> presets, int target,
                                  std::vector<StateUpdate>* updates) const {
    const std::size_t n = nodes_.size();
    if (target < 0 || target >= static_cast<int>(n)) {
        throw Error(ErrorCode::InvalidArgument, "graph has no output node");
    }
    std::vector<const BasicTensor<T>*> preset_of(n, nullptr);
    for (const auto& p : presets) {
        preset_of.at(static_cast<std::size_t>(p.node)) = p.value;
    }

    std::vector<bool> needed(n, false);
    std::vector<int> consumers(n, 0);
    bool uses_input = false;
    needed[static_cast<std::size_t>(target)] = true;
    for (int id = target; id >= 0; --id) {
        const auto i = static_cast<std::size_t>(id);
        if (!needed[i] || preset_of[i] != nullptr) {
            continue;
        }
        for (int in : nodes_[i].inputs) {
            if (in == kGraphInput) {
                uses_input = true;
            } else {
                needed[static_cast<std::size_t>(in)] = true;
                ++consumers[static_cast<std::size_t>(in)];
            }
        }
    }

    std::size_t batch_size = 0;
    if (uses_input) {
        if (batch.rank() != input_shape_.size() + 1 || batch.dim(0) == 0 ||
            !std::equal(input_shape_.begin(), input_shape_.end(), batch.shape().begin() + 1)) {
            throw Error(ErrorCode::ShapeMismatch, "graph expects [batch] + " + shape_string(input_shape_) + ", got " +
                                                      shape_string(batch.shape()));
        }
        batch_size = batch.dim(0);
    } else {
        for (const auto& p : presets) {
            if (needed[static_cast<std::size_t>(p.node)]) {
                batch_size = p.value->shape().empty() ? 0 : p.value->dim(0);
            }
        }
    }

    if (cache != nullptr) {
        cache->nodes.assign(n, NodeCache<T>{});
        cache->input = uses_input ? batch : BasicTensor<T>();
    }
    std::vector<BasicTensor<T>> outs(n);
    auto input_of = [&](int in) -> const BasicTensor<T>& {
        return in == kGraphInput ? batch : outs[static_cast<std::size_t>(in)];
    };

    for (int id = 0; id <= target; ++id) {
        const auto i = static_cast<std::size_t>(id);
        if (!needed[i]) {
            continue;
        }
        const Node& node = nodes_[i];
        NodeCache<T> scratch;
        NodeCache<T>& nc = cache != nullptr ? cache->nodes[i] : scratch;
        nc.computed = true;

        if (preset_of[i] != nullptr) {
            if (preset_of[i]->shape() != batched(batch_size, node.output_shape)) {
                throw Error(ErrorCode::ShapeMismatch, "preset for " + node.name + " has shape " +
                                                          shape_string(preset_of[i]->shape()));
            }
            outs[i] = *preset_of[i];
        } else {
            const bool train_here = mode == Mode::Train && !node.pinned_infer;
            const BasicTensor<T>& x = input_of(node.inputs.front());
            auto param = [&](std::size_t k) -> const BasicTensor<T>& { return params_[node.params[k]].value; };
            switch (node.spec.kind) {
            case LayerKind::Conv2D:
                outs[i] = ops::conv2d_forward(x, param(0), param(1), node.spec.stride);
                break;
            case LayerKind::BatchNorm:
                if (train_here) {
                    BasicTensor<T> mean = param(2);
                    BasicTensor<T> var = param(3);
                    outs[i] = ops::batchnorm_forward_train(x, param(0), param(1), static_cast<T>(node.spec.epsilon),
                                                           static_cast<T>(node.spec.momentum), mean, var, nc.batchnorm);
                    nc.batch_statistics = true;
                    if (updates != nullptr) {
                        updates->push_back({node.params[2], std::move(mean)});
                        updates->push_back({node.params[3], std::move(var)});
                    }
                } else {
                    outs[i] = ops::batchnorm_forward_infer(x, param(0), param(1), param(2), param(3),
                                                           static_cast<T>(node.spec.epsilon),
                                                           cache != nullptr ? &nc.batchnorm : nullptr);
                }
                break;
            case LayerKind::ReLU:
                outs[i] = ops::relu_forward(x);
                break;
            case LayerKind::Dense:
                outs[i] = ops::dense_forward(x, param(0), param(1));
                break;
            case LayerKind::Dropout:
                if (train_here && node.spec.rate > 0.0f) {
                    Rng rng(derive_seed(derive_seed(seed_ ^ 0xD2B74407B1CE6E93ULL, dropout_counter_),
                                        static_cast<std::uint64_t>(id)));
                    const T keep_scale = T{1} / (T{1} - static_cast<T>(node.spec.rate));
                    nc.mask.resize(x.size());
                    for (auto& m : nc.mask) {
                        m = rng.uniform() < static_cast<double>(node.spec.rate) ? T{0} : keep_scale;
                    }
                    outs[i] = ops::dropout_forward(x, std::span<const T>(nc.mask));
                } else {
                    outs[i] = x;
                }
                break;
            case LayerKind::Flatten:
                outs[i] = x;
                outs[i].reshape({x.dim(0), x.size() / x.dim(0)});
                break;
            case LayerKind::ConcatChannels: {
                std::vector<const BasicTensor<T>*> operands;
                for (int in : node.inputs) {
                    operands.push_back(&input_of(in));
                }
                outs[i] = ops::concat_channels_forward(std::span<const BasicTensor<T>* const>(operands));
                break;
            }
            case LayerKind::Sigmoid:
                outs[i] = ops::sigmoid_forward(x);
                break;
            case LayerKind::Softmax:
                outs[i] = ops::softmax_forward(x);
                break;
            }
            if (cache == nullptr) {
                for (int in : node.inputs) {
                    if (in != kGraphInput && --consumers[static_cast<std::size_t>(in)] == 0) {
                        outs[static_cast<std::size_t>(in)] = BasicTensor<T>();
                    }
                }
            }
        }
    }

    BasicTensor<T> result = outs[static_cast<std::size_t>(target)];
    if (cache != nullptr) {
        for (std::size_t i = 0; i < n; ++i) {
            cache->nodes[i].output = std::move(outs[i]);
        }
    }
    return result;
}

template <typename T>
BasicTensor<T> BasicGraph<T>::forward(const BasicTensor<T>& batch, Mode mode, ForwardCache<T>* cache,
                                      std::span<const Preset<T>> presets) {
    std::vector<StateUpdate> updates;
    BasicTensor<T> out = run(batch, mode, cache, presets, output_, &updates);
    for (auto& u : updates) {
        params_[u.param].value = std::move(u.value);
    }
    if (mode == Mode::Train) {
        ++dropout_counter_;
    }
    return out;
}

template <typename T>
BasicTensor<T> BasicGraph<T>::infer(const BasicTensor<T>& batch) const {
    return run(batch, Mode::Infer, nullptr, {}, output_, nullptr);
}

template <typename T>
BasicTensor<T> BasicGraph<T>::infer_until(const BasicTensor<T>& batch, int node) const {
    return run(batch, Mode::Infer, nullptr, {}, node, nullptr);
}

template <typename T>
Gradients<T> BasicGraph<T>::backward(const ForwardCache<T>& cache, const BasicTensor<T>& output_grad,
                                     bool want_input_grad) const {
    const std::size_t n = nodes_.size();
    if (cache.nodes.size() != n) {
        throw Error(ErrorCode::InvalidArgument, "forward cache does not belong to this graph");
    }
    const auto out_index = static_cast<std::size_t>(output_);
    if (!cache.nodes[out_index].computed || output_grad.shape() != cache.nodes[out_index].output.shape()) {
        throw Error(ErrorCode::ShapeMismatch, "output gradient has shape " + shape_string(output_grad.shape()));
    }

    // A node needs a gradient when it owns a trainable parameter or sits
    // downstream of one (or of the input, when its gradient is wanted).
    std::vector<bool> needs_grad(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        if (!cache.nodes[i].computed) {
            continue;
        }
        for (std::size_t p : nodes_[i].params) {
            needs_grad[i] = needs_grad[i] || params_[p].trainable;
        }
        for (int in : nodes_[i].inputs) {
            needs_grad[i] = needs_grad[i] || (in == kGraphInput ? want_input_grad && !cache.input.empty()
                                                            : needs_grad[static_cast<std::size_t>(in)]);
        }
    }

    Gradients<T> result;
    result.params.resize(params_.size());
    std::vector<BasicTensor<T>> node_grad(n);
    node_grad[out_index] = output_grad;

    for (int id = output_; id >= 0; --id) {
        const auto i = static_cast<std::size_t>(id);
        if (!needs_grad[i] || node_grad[i].empty()) {
            continue;
        }
        const Node& node = nodes_[i];
        const NodeCache<T>& nc = cache.nodes[i];
        const BasicTensor<T> upstream = std::move(node_grad[i]);
        node_grad[i] = BasicTensor<T>();

        auto input_value = [&](int in) -> const BasicTensor<T>& {
            return in == kGraphInput ? cache.input : cache.nodes[static_cast<std::size_t>(in)].output;
        };
        auto wants = [&](int in) {
            return in == kGraphInput ? want_input_grad && !cache.input.empty() : needs_grad[static_cast<std::size_t>(in)];
        };
        auto param_grad = [&](std::size_t k) -> BasicTensor<T>* {
            const std::size_t p = node.params[k];
            return params_[p].trainable ? &result.params[p] : nullptr;
        };
        auto deliver = [&](int in, BasicTensor<T>&& g) {
            if (in == kGraphInput) {
                accumulate_into(result.input, std::move(g));
            } else {
                accumulate_into(node_grad[static_cast<std::size_t>(in)], std::move(g));
            }
        };

        const int src = node.inputs.front();
        BasicTensor<T> input_grad;
        BasicTensor<T>* input_grad_ptr = wants(src) ? &input_grad : nullptr;
        const BasicTensor<T>* param0 = node.params.empty() ? nullptr : &params_[node.params[0]].value;

        switch (node.spec.kind) {
        case LayerKind::Conv2D:
            ops::conv2d_backward(upstream, input_value(src), *param0, node.spec.stride, input_grad_ptr, param_grad(0),
                                 param_grad(1));
            break;
        case LayerKind::BatchNorm:
            if (nc.batch_statistics) {
                ops::batchnorm_backward(upstream, nc.batchnorm, *param0, input_grad_ptr, param_grad(0), param_grad(1));
            } else {
                ops::batchnorm_backward_infer(upstream, nc.batchnorm, *param0, input_grad_ptr, param_grad(0),
                                              param_grad(1));
            }
            break;
        case LayerKind::Dense:
            ops::dense_backward(upstream, input_value(src), *param0, input_grad_ptr, param_grad(0), param_grad(1));
            break;
        case LayerKind::ReLU:
            if (input_grad_ptr) input_grad = ops::relu_backward(upstream, nc.output);
            break;
        case LayerKind::Sigmoid:
            if (input_grad_ptr) input_grad = ops::sigmoid_backward(upstream, nc.output);
            break;
        case LayerKind::Softmax:
            if (input_grad_ptr) input_grad = ops::softmax_backward(upstream, nc.output);
            break;
        case LayerKind::Dropout:
            if (input_grad_ptr) {
                input_grad = nc.mask.empty() ? upstream : ops::dropout_backward(upstream, std::span<const T>(nc.mask));
            }
            break;
        case LayerKind::Flatten:
            if (input_grad_ptr) {
                input_grad = upstream;
                input_grad.reshape(input_value(src).shape());
            }
            break;
        case LayerKind::ConcatChannels: {
            std::vector<std::size_t> widths;
            for (int in : node.inputs) {
                widths.push_back(input_value(in).shape().back());
            }
            auto parts = ops::concat_channels_backward(upstream, std::span<const std::size_t>(widths));
            for (std::size_t k = 0; k < node.inputs.size(); ++k) {
                if (wants(node.inputs[k])) {
                    deliver(node.inputs[k], std::move(parts[k]));
                }
            }
            input_grad_ptr = nullptr;
            break;
        }
        }
        if (input_grad_ptr != nullptr && !input_grad.empty()) {
            deliver(src, std::move(input_grad));
        }
    }
    return result;
}

template <typename T>
int BasicGraph<T>::append(const BasicGraph& other, int input, std::string_view prefix) {
    if (shape_of(input) != other.input_shape_) {
        throw Error(ErrorCode::ShapeMismatch, "appended graph expects " + shape_string(other.input_shape_) + ", got " +
                                                  shape_string(shape_of(input)));
    }
    std::vector<int> idmap(other.nodes_.size());
    for (std::size_t i = 0; i < other.nodes_.size(); ++i) {
        const Node& src = other.nodes_[i];
        Node node{std::string(prefix) + src.name, src.spec, {}, src.output_shape, {}, src.pinned_infer};
        if (find(node.name) >= 0) {
            throw Error(ErrorCode::InvalidArgument, "duplicate node name " + node.name);
        }
        for (int in : src.inputs) {
            node.inputs.push_back(in == kGraphInput ? input : idmap[static_cast<std::size_t>(in)]);
        }
        for (std::size_t p : src.params) {
            Parameter<T> copy = other.params_[p];
            copy.name = std::string(prefix) + copy.name;
            params_.push_back(std::move(copy));
            node.params.push_back(params_.size() - 1);
        }
        idmap[i] = static_cast<int>(nodes_.size());
        nodes_.push_back(std::move(node));
    }
    output_ = idmap[static_cast<std::size_t>(other.output_)];
    return output_;
}

template <typename T>
BasicGraph<T> BasicGraph<T>::extract(std::span<const int> node_ids, int output, std::string_view strip_prefix) const {
    const std::set<int> members(node_ids.begin(), node_ids.end());
    if (!members.contains(output) || !std::is_sorted(node_ids.begin(), node_ids.end())) {
        throw Error(ErrorCode::InvalidArgument, "extract needs ascending node ids containing the output");
    }
    std::set<int> external;
    for (int id : node_ids) {
        for (int in : node(id).inputs) {
            if (!members.contains(in)) {
                external.insert(in);
            }
        }
    }
    if (external.size() > 1) {
        throw Error(ErrorCode::InvalidArgument, "extracted subgraph has more than one external producer");
    }
    const int source = external.empty() ? kGraphInput : *external.begin();
    BasicGraph g(shape_of(source), seed_);
    g.dropout_counter_ = dropout_counter_;
    std::vector<int> idmap(nodes_.size(), kGraphInput);
    for (int id : node_ids) {
        const Node& src = node(id);
        Node copy{strip(src.name, strip_prefix), src.spec, {}, src.output_shape, {}, src.pinned_infer};
        for (int in : src.inputs) {
            copy.inputs.push_back(in == source ? kGraphInput : idmap[static_cast<std::size_t>(in)]);
        }
        for (std::size_t p : src.params) {
            Parameter<T> param = params_[p];
            param.name = strip(param.name, strip_prefix);
            g.params_.push_back(std::move(param));
            copy.params.push_back(g.params_.size() - 1);
        }
        idmap[static_cast<std::size_t>(id)] = static_cast<int>(g.nodes_.size());
        g.nodes_.push_back(std::move(copy));
    }
    g.output_ = idmap[static_cast<std::size_t>(output)];
    return g;
}

template <typename T>
BasicGraph<T> BasicGraph<T>::truncated(int new_output) const {
    std::vector<bool> needed(nodes_.size(), false);
    needed.at(static_cast<std::size_t>(new_output)) = true;
    for (int id = new_output; id >= 0; --id) {
        if (needed[static_cast<std::size_t>(id)]) {
            for (int in : node(id).inputs) {
                if (in != kGraphInput) {
                    needed[static_cast<std::size_t>(in)] = true;
                }
            }
        }
    }
    std::vector<int> ids;
    for (int id = 0; id <= new_output; ++id) {
        if (needed[static_cast<std::size_t>(id)]) {
            ids.push_back(id);
        }
    }
    return extract(ids, new_output);
}

template <typename T>
template <typename U>
BasicGraph<U> BasicGraph<T>::cast() const {
    BasicGraph<U> g;
    g.input_shape_ = input_shape_;
    g.seed_ = seed_;
    g.dropout_counter_ = dropout_counter_;
    g.nodes_ = nodes_;
    g.output_ = output_;
    for (const auto& p : params_) {
        g.params_.push_back({p.name, p.role, p.value.template cast<U>(), p.trainable});
    }
    return g;
}

template class BasicGraph<float>;
template class BasicGraph<double>;
template BasicGraph<double> BasicGraph<float>::cast<double>() const;
template BasicGraph<float> BasicGraph<double>::cast<float>() const;
template BasicGraph<float> BasicGraph<float>::cast<float>() const;

} // namespace bsid::nn
