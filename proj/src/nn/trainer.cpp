#include "bsid/nn/trainer.hpp"

#include <numeric>

#include "bsid/util/random.hpp"

namespace bsid::nn {

std::vector<double> fit(Graph& graph, const Tensor& samples, const BatchLoss& loss, const FitConfig& config,
                        int feed_node) {
    if (samples.rank() == 0 || samples.dim(0) == 0) {
        throw Error(ErrorCode::EmptyDataset, "no training samples");
    }
    if (config.batch_size < 2) {
        throw Error(ErrorCode::InvalidArgument, "batch size must be at least 2");
    }
    const std::size_t count = samples.dim(0);
    Adam optimizer(graph, config.adam);
    std::vector<double> history;
    std::vector<std::size_t> order(count);

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng rng(derive_seed(config.seed, epoch));
        rng.shuffle(std::span<std::size_t>(order));

        double total = 0.0;
        std::size_t batches = 0;
        for (std::size_t begin = 0; begin < count;) {
            std::size_t end = std::min(count, begin + config.batch_size);
            if (count - end == 1) {
                end = count;
            }
            const std::span<const std::size_t> rows(order.data() + begin, end - begin);
            const Tensor batch = gather_rows(samples, rows);

            ForwardCache<float> cache;
            Tensor output;
            if (feed_node == kGraphInput) {
                output = graph.forward(batch, Mode::Train, &cache);
            } else {
                const Preset<float> preset{feed_node, &batch};
                output = graph.forward(Tensor(), Mode::Train, &cache, std::span<const Preset<float>>(&preset, 1));
            }
            const LossResult<float> result = loss(output, rows);
            const Gradients<float> grads = graph.backward(cache, result.grad);
            optimizer.step(graph, grads);

            total += result.value;
            ++batches;
            begin = end;
        }
        history.push_back(total / static_cast<double>(batches));
    }
    return history;
}

Tensor predict_batched(const Graph& graph, const Tensor& samples, std::size_t batch_size) {
    const std::size_t count = samples.rank() == 0 ? 0 : samples.dim(0);
    Shape out_shape{count};
    out_shape.insert(out_shape.end(), graph.output_shape().begin(), graph.output_shape().end());
    Tensor out(out_shape);
    const std::size_t width = element_count(graph.output_shape());
    for (std::size_t begin = 0; begin < count; begin += batch_size) {
        const std::size_t n = std::min(batch_size, count - begin);
        const Tensor chunk = graph.infer(slice_rows(samples, begin, n));
        std::copy(chunk.values().begin(), chunk.values().end(), out.data() + begin * width);
    }
    return out;
}

} // namespace bsid::nn
