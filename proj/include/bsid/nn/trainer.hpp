#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "bsid/nn/adam.hpp"
#include "bsid/nn/graph.hpp"
#include "bsid/nn/loss.hpp"

namespace bsid::nn {

struct FitConfig {
    std::size_t epochs = 1;
    std::size_t batch_size = 128;
    AdamConfig adam;
    std::uint64_t seed = 0;
};

/// Loss for one mini-batch: receives the graph output and the sample indices
/// that produced it.
using BatchLoss = std::function<LossResult<float>(const Tensor& output, std::span<const std::size_t> rows)>;

/// Mini-batch Adam training. `samples` has a leading sample axis and is fed to
/// the graph input, or, when `feed_node` is a node id, supplied as that node's
/// activation (everything upstream of it is skipped). Epoch order is a seeded
/// shuffle; a trailing batch of one sample is folded into the previous batch
/// so batch statistics are always defined. Returns the mean loss per epoch.
std::vector<double> fit(Graph& graph, const Tensor& samples, const BatchLoss& loss, const FitConfig& config,
                        int feed_node = kGraphInput);

/// Infer-mode forward over `samples` in chunks of `batch_size`.
Tensor predict_batched(const Graph& graph, const Tensor& samples, std::size_t batch_size = 256);

} // namespace bsid::nn
