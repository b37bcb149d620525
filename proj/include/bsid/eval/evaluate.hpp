#pragma once

#include <cstdint>
#include <vector>

#include "bsid/eval/metrics.hpp"
#include "bsid/image/dataset.hpp"
#include "bsid/model/integrated.hpp"

namespace bsid::eval {

struct Evaluation {
    std::vector<std::uint16_t> predictions;
    ConfusionMatrix confusion;
    MetricsReport report;
};

/// EmptyDataset when d3 has no records.
Evaluation evaluate(const model::IntegratedModel& model, const image::ImageDataset& d3);

/// Scores class-id predictions against the dataset labels.
Evaluation score(std::vector<std::uint16_t> predictions, const image::ImageDataset& d3, std::size_t classes);

} // namespace bsid::eval
