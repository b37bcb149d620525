#include "bsid/model/settings.hpp"

#include <string_view>

namespace bsid::model {
namespace {

constexpr std::string_view kKeys[] = {
    "ingest.benign_class", "ingest.benign_ratio",
    "base.epochs", "base.batch_size", "base.learning_rate", "base.weight_positives", "base.max_positive_weight",
    "meta.epochs", "meta.batch_size", "meta.learning_rate", "meta.hidden1", "meta.hidden2", "meta.dropout",
};

void read_common(const Config& c, const std::string& p, TrainConfig& t) {
    t.epochs = c.get_uint(p + "epochs", t.epochs);
    t.batch_size = c.get_uint(p + "batch_size", t.batch_size);
    t.adam.learning_rate = static_cast<float>(c.get_double(p + "learning_rate", t.adam.learning_rate));
    if (t.batch_size < 2 || !(t.adam.learning_rate > 0.0f)) {
        throw Error(ErrorCode::InvalidArgument, p + "batch_size must be >= 2 and " + p + "learning_rate > 0");
    }
}

std::uint32_t width(const Config& c, const std::string& key, std::uint32_t fallback) {
    const auto v = c.get_uint(key, fallback);
    if (v == 0 || v > 1u << 20) {
        throw Error(ErrorCode::InvalidArgument, key + " out of range");
    }
    return static_cast<std::uint32_t>(v);
}

} // namespace

PipelineSettings load_settings(const Config& c) {
    c.require_known(kKeys);
    PipelineSettings s;
    s.benign_class = c.get_string("ingest.benign_class", s.benign_class);
    s.benign_ratio = c.get_double("ingest.benign_ratio", s.benign_ratio);
    read_common(c, "base.", s.base);
    s.base.weight_positives = c.get_bool("base.weight_positives", s.base.weight_positives);
    s.base.max_positive_weight =
        static_cast<float>(c.get_double("base.max_positive_weight", s.base.max_positive_weight));
    read_common(c, "meta.", s.meta);
    s.head.hidden1 = width(c, "meta.hidden1", s.head.hidden1);
    s.head.hidden2 = width(c, "meta.hidden2", s.head.hidden2);
    s.head.dropout = static_cast<float>(c.get_double("meta.dropout", s.head.dropout));
    if (!(s.head.dropout >= 0.0f && s.head.dropout < 1.0f)) {
        throw Error(ErrorCode::InvalidArgument, "meta.dropout must be in [0, 1)");
    }
    return s;
}

} // namespace bsid::model
