#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bsid/nn/layer.hpp"
#include "bsid/nn/ops.hpp"
#include "bsid/nn/tensor.hpp"

namespace bsid::nn {

enum class ParamRole : std::uint8_t { Weight = 1, Bias, Gamma, Beta, RunningMean, RunningVar };

template <typename T>
struct Parameter {
    std::string name;  // "<node name>/<role>"
    ParamRole role = ParamRole::Weight;
    BasicTensor<T> value;
    bool trainable = true;  // always false for running statistics

    bool is_statistic() const { return role == ParamRole::RunningMean || role == ParamRole::RunningVar; }
};

struct Node {
    std::string name;
    LayerSpec spec;
    std::vector<int> inputs;           // kGraphInput or ids of earlier nodes
    Shape output_shape;                // per sample, without the batch axis
    std::vector<std::size_t> params;   // indices into the parameter list
    bool pinned_infer = false;         // runs in infer mode even while training
};

inline constexpr int kGraphInput = -1;

template <typename T>
struct NodeCache {
    bool computed = false;
    BasicTensor<T> output;
    ops::BatchNormCache<T> batchnorm;
    bool batch_statistics = false;  // batchnorm ran on batch statistics
    std::vector<T> mask;            // dropout; empty when the node acted as identity
};

/// Activations kept by a forward pass for the matching backward pass.
template <typename T>
struct ForwardCache {
    BasicTensor<T> input;
    std::vector<NodeCache<T>> nodes;
};

/// Supplies the activation of `node` directly; everything only feeding it is
/// skipped. Used to start a forward pass past a frozen prefix.
template <typename T>
struct Preset {
    int node;
    const BasicTensor<T>* value;
};

/// Gradients for each parameter, aligned with BasicGraph::parameters().
/// Entries for parameters that received no gradient stay empty (size 0):
/// nothing is allocated for frozen parameters.
template <typename T>
struct Gradients {
    std::vector<BasicTensor<T>> params;
    BasicTensor<T> input;  // only filled when requested

    std::size_t allocated_count() const {
        std::size_t n = 0;
        for (const auto& g : params) {
            n += g.empty() ? 0 : 1;
        }
        return n;
    }
};

/// Acyclic layer graph with a single input and a single output. Nodes are
/// stored in topological order (inputs always precede their consumers), and
/// parameters are initialized deterministically from the graph seed.
template <typename T>
class BasicGraph {
public:
    BasicGraph() = default;
    BasicGraph(Shape input_shape, std::uint64_t seed);

    /// Appends a node fed by `inputs` (kGraphInput or existing node ids),
    /// infers its output shape, creates its parameters, and makes it the output.
    int add(std::string name, const LayerSpec& spec, std::vector<int> inputs);
    int add(std::string name, const LayerSpec& spec, int input) { return add(std::move(name), spec, std::vector<int>{input}); }

    void set_output(int node);
    int output() const { return output_; }

    const Shape& input_shape() const { return input_shape_; }
    const Shape& output_shape() const;
    const Shape& shape_of(int node) const;

    std::uint64_t seed() const { return seed_; }
    std::uint64_t dropout_counter() const { return dropout_counter_; }
    void set_dropout_counter(std::uint64_t value) { dropout_counter_ = value; }

    const std::vector<Node>& nodes() const { return nodes_; }
    const Node& node(int id) const { return nodes_.at(static_cast<std::size_t>(id)); }
    int find(std::string_view name) const;  // -1 when absent

    std::vector<Parameter<T>>& parameters() { return params_; }
    const std::vector<Parameter<T>>& parameters() const { return params_; }

    /// Scalar count over weights/biases/gammas/betas (running statistics excluded).
    std::size_t parameter_count(bool trainable_only = false) const;

    void set_trainable(bool trainable);
    void pin_infer(bool pinned = true);
    void pin_node(int id, bool pinned) { nodes_.at(static_cast<std::size_t>(id)).pinned_infer = pinned; }

    BasicTensor<T> forward(const BasicTensor<T>& batch, Mode mode, ForwardCache<T>* cache = nullptr,
                           std::span<const Preset<T>> presets = {});

    /// Infer-mode forward; never mutates the graph, so concurrent calls are safe.
    BasicTensor<T> infer(const BasicTensor<T>& batch) const;

    /// Output activations of `node` in infer mode.
    BasicTensor<T> infer_until(const BasicTensor<T>& batch, int node) const;

    Gradients<T> backward(const ForwardCache<T>& cache, const BasicTensor<T>& output_grad,
                          bool want_input_grad = false) const;

    /// Copies `other` into this graph with `input` feeding its input and every
    /// name prefixed. Returns the id of other's output node in this graph.
    int append(const BasicGraph& other, int input, std::string_view prefix);

    /// Standalone graph made of `node_ids` (ascending). The nodes must have at
    /// most one producer outside the set, which becomes the new graph input.
    /// `strip_prefix` is removed from node and parameter names.
    BasicGraph extract(std::span<const int> node_ids, int output, std::string_view strip_prefix = {}) const;

    /// The graph restricted to what `new_output` depends on.
    BasicGraph truncated(int new_output) const;

    template <typename U>
    BasicGraph<U> cast() const;

private:
    template <typename U>
    friend class BasicGraph;

    struct StateUpdate {
        std::size_t param;
        BasicTensor<T> value;
    };

    BasicTensor<T> run(const BasicTensor<T>& batch, Mode mode, ForwardCache<T>* cache,
                       std::span<const Preset<T>> presets, int target, std::vector<StateUpdate>* updates) const;

    std::size_t add_param(const std::string& node_name, ParamRole role, BasicTensor<T> value, bool trainable);

    Shape input_shape_;
    std::uint64_t seed_ = 0;
    std::uint64_t dropout_counter_ = 0;
    std::vector<Node> nodes_;
    std::vector<Parameter<T>> params_;
    int output_ = kGraphInput;
};

using Graph = BasicGraph<float>;
using GraphD = BasicGraph<double>;

} // namespace bsid::nn
