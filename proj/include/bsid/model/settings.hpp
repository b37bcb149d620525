#pragma once

#include <cstdint>
#include <string>

#include "bsid/model/base_learner.hpp"
#include "bsid/model/integrated.hpp"
#include "bsid/util/config.hpp"
#include "bsid/util/random.hpp"

namespace bsid::model {

/// Everything a pipeline run can override from a --config file.
struct PipelineSettings {
    std::string benign_class = "BENIGN";
    double benign_ratio = 1.0;
    TrainConfig base;        // epochs 20
    TrainConfig meta;        // epochs 30, no positive weighting
    MetaHeadConfig head;

    PipelineSettings() {
        meta.epochs = 30;
        meta.weight_positives = false;
    }
};

/// Keys: ingest.benign_class, ingest.benign_ratio,
/// base.{epochs,batch_size,learning_rate,weight_positives,max_positive_weight},
/// meta.{epochs,batch_size,learning_rate,hidden1,hidden2,dropout}.
/// InvalidArgument for unknown keys or bad values.
PipelineSettings load_settings(const Config& config);

// Sub-seeds of the run seed, one stream per randomized step.
inline std::uint64_t prepare_seed(std::uint64_t s) { return derive_seed(s, 1); }
inline std::uint64_t split_seed(std::uint64_t s) { return derive_seed(s, 2); }
inline std::uint64_t base_init_seed(std::uint64_t s, std::uint16_t k) { return derive_seed(s, 100 + k); }
inline std::uint64_t base_train_seed(std::uint64_t s, std::uint16_t k) { return derive_seed(s, 200 + k); }
inline std::uint64_t meta_init_seed(std::uint64_t s) { return derive_seed(s, 300); }
inline std::uint64_t meta_train_seed(std::uint64_t s) { return derive_seed(s, 301); }

} // namespace bsid::model
