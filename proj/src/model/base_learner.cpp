#include "bsid/model/base_learner.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "bsid/nn/loss.hpp"
#include "bsid/nn/trainer.hpp"

namespace bsid::model {

using nn::LayerSpec;

namespace {

// BN -> ReLU -> Conv, the pre-activation order of every conv in the trunk.
int preact_conv(nn::Graph& g, const std::string& block, int index, int input, std::uint32_t channels,
                std::uint32_t stride) {
    const std::string n = std::to_string(index);
    const int bn = g.add(block + "/bn" + n, LayerSpec::batchnorm(), input);
    const int relu = g.add(block + "/relu" + n, LayerSpec::relu(), bn);
    return g.add(block + "/conv" + n, LayerSpec::conv2d(channels, stride), relu);
}

} // namespace

nn::Graph build_base_model(std::uint64_t seed) {
    nn::Graph g({image::kSide, image::kSide, 1}, seed);

    int x = preact_conv(g, "b1", 1, nn::kGraphInput, 8, 1);
    x = preact_conv(g, "b1", 2, x, 8, 1);
    const int cat1 = g.add(kBlock2Input, LayerSpec::concat_channels(), std::vector<int>{nn::kGraphInput, x});

    x = preact_conv(g, "b2", 1, cat1, 16, 1);
    x = preact_conv(g, "b2", 2, x, 16, 1);
    const int cat2 = g.add(kBlock3Input, LayerSpec::concat_channels(), std::vector<int>{cat1, x});

    x = preact_conv(g, "b3", 1, cat2, 32, 1);
    x = preact_conv(g, "b3", 2, x, 32, 2);

    x = g.add(kFlatten, LayerSpec::flatten(), x);
    x = g.add("head/dense64", LayerSpec::dense(64), x);
    x = g.add("head/relu64", LayerSpec::relu(), x);
    x = g.add("head/drop64", LayerSpec::dropout(0.2f), x);
    x = g.add("head/dense32", LayerSpec::dense(32), x);
    x = g.add("head/relu32", LayerSpec::relu(), x);
    x = g.add("head/drop32", LayerSpec::dropout(0.2f), x);
    x = g.add("head/dense16", LayerSpec::dense(kTrunkWidth), x);
    x = g.add(kTrunkOutput, LayerSpec::relu(), x);
    x = g.add("head/dense1", LayerSpec::dense(1), x);
    g.add("head/sigmoid", LayerSpec::sigmoid(), x);
    return g;
}

std::size_t base_model_parameter_count() {
    auto conv = [](std::size_t in, std::size_t out) { return 9 * in * out + out; };
    auto bn = [](std::size_t ch) { return 2 * ch; };
    auto dense = [](std::size_t in, std::size_t out) { return in * out + out; };
    return bn(1) + conv(1, 8) + bn(8) + conv(8, 8)              // block 1
           + bn(9) + conv(9, 16) + bn(16) + conv(16, 16)        // block 2 on concat(input, block 1)
           + bn(25) + conv(25, 32) + bn(32) + conv(32, 32)      // block 3 on concat(block 2 in, out)
           + dense(8 * 8 * 32, 64) + dense(64, 32) + dense(32, 16) + dense(16, 1);
}

BinaryView to_one_vs_all(const image::ImageDataset& data, std::uint16_t class_id) {
    if (class_id >= data.class_count) {
        throw Error(ErrorCode::ClassOutOfRange, "class " + std::to_string(class_id) + " but the dataset has " +
                                                    std::to_string(data.class_count) + " classes");
    }
    BinaryView view{data.tensor(), nn::Tensor({data.size(), 1})};
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (data.labels[i] == class_id) {
            view.targets[i] = 1.0f;
            ++view.positives;
        }
    }
    return view;
}

TrainReport train_base_learner(nn::Graph& model, const BinaryView& view, const TrainConfig& config) {
    const std::size_t n = view.targets.size();
    if (n == 0 || view.positives == 0 || view.positives == n) {
        throw Error(ErrorCode::DegenerateView, "one-vs-all view needs both targets: " + std::to_string(view.positives) +
                                                   " positives of " + std::to_string(n));
    }
    TrainReport report;
    if (config.weight_positives) {
        const double ratio = static_cast<double>(n - view.positives) / static_cast<double>(view.positives);
        report.positive_weight = static_cast<float>(std::min<double>(ratio, config.max_positive_weight));
    }
    const float w = report.positive_weight;
    auto loss = [&](const nn::Tensor& out, std::span<const std::size_t> rows) {
        return nn::binary_cross_entropy(out, nn::gather_rows(view.targets, rows), w);
    };
    nn::FitConfig fit{config.epochs, config.batch_size, config.adam, config.seed};
    report.epoch_loss = nn::fit(model, view.images, loss, fit);
    return report;
}

nn::Graph freeze_and_truncate(const nn::Graph& trained) {
    const int out = trained.find(kTrunkOutput);
    if (out < 0) {
        throw Error(ErrorCode::TrunkShapeMismatch, std::string("model has no ") + kTrunkOutput + " node");
    }
    nn::Graph trunk = trained.truncated(out);
    trunk.set_trainable(false);
    trunk.pin_infer(true);
    return trunk;
}

std::string base_checkpoint_name(std::uint16_t class_id) { return "base_" + std::to_string(class_id) + ".bsnn"; }

std::vector<BaseManifestEntry> read_base_manifest(const std::string& dir) {
    std::vector<BaseManifestEntry> out;
    std::ifstream in(std::filesystem::path(dir) / "manifest");
    if (!in) {
        return out;
    }
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') {
            continue;
        }
        const auto a = line.find('\t');
        const auto b = line.rfind('\t');
        if (a == std::string::npos || a == b) {
            throw Error(ErrorCode::ManifestMismatch, "bad base manifest line: " + line);
        }
        BaseManifestEntry e;
        try {
            const unsigned long id = std::stoul(line.substr(0, a));
            if (id > 0xFFFF) {
                throw std::out_of_range("class id");
            }
            e.class_id = static_cast<std::uint16_t>(id);
        } catch (const std::logic_error&) {
            throw Error(ErrorCode::ManifestMismatch, "bad class id in base manifest: " + line);
        }
        e.class_name = line.substr(a + 1, b - a - 1);
        e.file = line.substr(b + 1);
        out.push_back(std::move(e));
    }
    return out;
}

void upsert_base_manifest(const std::string& dir, const BaseManifestEntry& entry) {
    auto entries = read_base_manifest(dir);
    std::erase_if(entries, [&](const BaseManifestEntry& e) { return e.class_id == entry.class_id; });
    entries.push_back(entry);
    std::sort(entries.begin(), entries.end(),
              [](const BaseManifestEntry& a, const BaseManifestEntry& b) { return a.class_id < b.class_id; });
    const auto path = std::filesystem::path(dir) / "manifest";
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << "# class_id\tclass_name\tcheckpoint\n";
    for (const auto& e : entries) {
        out << e.class_id << '\t' << e.class_name << '\t' << e.file << '\n';
    }
    if (!out) {
        throw Error(ErrorCode::IoError, "cannot write " + path.string());
    }
}

} // namespace bsid::model
