#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "bsid/image/dataset.hpp"
#include "bsid/nn/adam.hpp"
#include "bsid/nn/graph.hpp"

namespace bsid::model {

inline constexpr std::size_t kTrunkWidth = 16;

// Node names that shape probes and graph surgery rely on.
inline constexpr const char* kBlock2Input = "concat1";
inline constexpr const char* kBlock3Input = "concat2";
inline constexpr const char* kBlock3Output = "b3/conv2";
inline constexpr const char* kFlatten = "flatten";
inline constexpr const char* kTrunkOutput = "head/relu16";

/// The concatenated CNN: three pre-activation conv blocks with two channel
/// concatenations, then a dense head ending in one sigmoid unit. All
/// parameters trainable, initialized from `seed`.
nn::Graph build_base_model(std::uint64_t seed);

/// Trainable scalars of build_base_model, tallied layer by layer.
std::size_t base_model_parameter_count();

struct BinaryView {
    nn::Tensor images;   // [n, 16, 16, 1]
    nn::Tensor targets;  // [n, 1], 1 where the record belongs to the class
    std::size_t positives = 0;
};

/// ClassOutOfRange when class_id >= data.class_count.
BinaryView to_one_vs_all(const image::ImageDataset& data, std::uint16_t class_id);

struct TrainConfig {
    std::size_t epochs = 20;
    std::size_t batch_size = 128;
    nn::AdamConfig adam;
    bool weight_positives = true;     // base learners: scale positive loss by #neg/#pos
    float max_positive_weight = 100.0f;
    std::uint64_t seed = 0;
};

struct TrainReport {
    std::vector<double> epoch_loss;
    float positive_weight = 1.0f;
};

/// Weighted binary cross-entropy training. DegenerateView unless both targets
/// occur.
TrainReport train_base_learner(nn::Graph& model, const BinaryView& view, const TrainConfig& config);

/// Drops the final dense+sigmoid pair; the result maps an image to the 16
/// ReLU activations before it, with every parameter frozen and every node
/// pinned to infer mode.
nn::Graph freeze_and_truncate(const nn::Graph& trained);

std::string base_checkpoint_name(std::uint16_t class_id);

struct BaseManifestEntry {
    std::uint16_t class_id = 0;
    std::string class_name;
    std::string file;  // relative to the manifest directory
};

/// Tab-separated "class_id, class name, checkpoint file" lines in a file
/// named `manifest` inside `dir`. Entries are kept sorted by class id;
/// writing an entry replaces any previous one for the same class.
void upsert_base_manifest(const std::string& dir, const BaseManifestEntry& entry);
std::vector<BaseManifestEntry> read_base_manifest(const std::string& dir);

} // namespace bsid::model
