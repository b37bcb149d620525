#include "bsid/eval/evaluate.hpp"

namespace bsid::eval {

Evaluation score(std::vector<std::uint16_t> predictions, const image::ImageDataset& d3, std::size_t classes) {
    Evaluation e;
    e.confusion = confusion_matrix(predictions, d3.labels, classes);
    e.report = macro_metrics(e.confusion);
    e.predictions = std::move(predictions);
    return e;
}

Evaluation evaluate(const model::IntegratedModel& model, const image::ImageDataset& d3) {
    if (d3.size() == 0) {
        throw Error(ErrorCode::EmptyDataset, "evaluation set is empty");
    }
    return score(model::predict_classes(model, d3.tensor()), d3, model.class_count());
}

} // namespace bsid::eval
