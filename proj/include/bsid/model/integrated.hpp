#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bsid/image/dataset.hpp"
#include "bsid/model/base_learner.hpp"
#include "bsid/nn/graph.hpp"

namespace bsid::model {

struct MetaHeadConfig {
    std::uint32_t hidden1 = 128;
    std::uint32_t hidden2 = 64;
    float dropout = 0.2f;
};

/// One graph: the image feeds N frozen trunks (node prefix "t<i>/"), their
/// outputs are concatenated in class order ("meta/concat") and a trainable
/// dense head ("meta/...") ends in an N-way softmax.
struct IntegratedModel {
    nn::Graph graph;
    std::vector<std::string> class_names;
    std::vector<int> trunk_outputs;  // node id of each trunk's output
    int concat = -1;                 // node id of the concatenation

    std::size_t class_count() const { return class_names.size(); }
    bool is_trunk_parameter(std::size_t index) const;
};

/// TrunkShapeMismatch when a trunk does not map 16x16x1 to 16 values or the
/// class list length differs from the trunk count (or is below 2);
/// TrainableTrunk when a trunk parameter is still trainable.
IntegratedModel build_integrated(std::span<const nn::Graph> trunks, std::vector<std::string> class_names,
                                 std::uint64_t seed, const MetaHeadConfig& head = {});

/// Standalone copies of the pieces, as stored in a bundle.
nn::Graph extract_trunk(const IntegratedModel& model, std::size_t index);
nn::Graph extract_meta_head(const IntegratedModel& model);  // input: [16 N] concatenated features

/// Concatenated trunk features for every image, [n, 16 N].
nn::Tensor trunk_features(const IntegratedModel& model, const nn::Tensor& images);

/// Categorical cross-entropy on the meta head only. Trunk features are
/// computed once up front (they cannot change) and fed at the concat node.
/// EmptyDataset for no records; ClassOutOfRange for a label >= N.
TrainReport train_meta(IntegratedModel& model, const image::ImageDataset& d2, const TrainConfig& config);

struct Prediction {
    std::vector<float> probabilities;
    std::uint16_t class_id = 0;
    std::string class_name;
};

/// Lowest index among the maxima.
std::uint16_t argmax(std::span<const float> values);

Prediction predict(const IntegratedModel& model, std::span<const float> image);
/// Softmax output for every image, [n, N].
nn::Tensor predict_probabilities(const IntegratedModel& model, const nn::Tensor& images);
std::vector<std::uint16_t> predict_classes(const IntegratedModel& model, const nn::Tensor& images);

/// Bundle directory: manifest, base_<id>.bsnn per trunk, meta.bsnn.
void save_integrated(const IntegratedModel& model, const std::string& dir);
/// ManifestMismatch when the manifest is missing or malformed or lists a
/// different number of trunk files than classes, or a listed file is absent;
/// ChecksumMismatch when a file's CRC differs from the manifest or the
/// checkpoint itself is corrupt.
IntegratedModel load_integrated(const std::string& dir);

} // namespace bsid::model
