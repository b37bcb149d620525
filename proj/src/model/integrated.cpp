#include "bsid/model/integrated.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "bsid/nn/checkpoint.hpp"
#include "bsid/nn/loss.hpp"
#include "bsid/nn/trainer.hpp"
#include "bsid/util/binary_io.hpp"
#include "bsid/util/random.hpp"

namespace bsid::model {

using nn::LayerSpec;

namespace {

const nn::Shape kImageShape{image::kSide, image::kSide, 1};

std::string trunk_prefix(std::size_t i) { return "t" + std::to_string(i) + "/"; }

nn::Graph build_meta_head(std::size_t classes, std::uint64_t seed, const MetaHeadConfig& head) {
    nn::Graph g({kTrunkWidth * classes}, seed);
    int x = g.add("dense1", LayerSpec::dense(head.hidden1), nn::kGraphInput);
    x = g.add("relu1", LayerSpec::relu(), x);
    x = g.add("drop1", LayerSpec::dropout(head.dropout), x);
    x = g.add("dense2", LayerSpec::dense(head.hidden2), x);
    x = g.add("relu2", LayerSpec::relu(), x);
    x = g.add("logits", LayerSpec::dense(static_cast<std::uint32_t>(classes)), x);
    g.add("softmax", LayerSpec::softmax(), x);
    return g;
}

IntegratedModel assemble(std::span<const nn::Graph> trunks, std::vector<std::string> class_names,
                         const nn::Graph& meta) {
    IntegratedModel m;
    m.class_names = std::move(class_names);
    // the unified graph takes the meta head's seed and dropout stream
    m.graph = nn::Graph(kImageShape, meta.seed());
    m.graph.set_dropout_counter(meta.dropout_counter());
    for (std::size_t i = 0; i < trunks.size(); ++i) {
        m.trunk_outputs.push_back(m.graph.append(trunks[i], nn::kGraphInput, trunk_prefix(i)));
    }
    m.concat = m.graph.add("meta/concat", LayerSpec::concat_channels(), m.trunk_outputs);
    m.graph.append(meta, m.concat, "meta/");
    return m;
}

void validate_trunks(std::span<const nn::Graph> trunks, std::size_t classes) {
    if (trunks.size() < 2 || classes != trunks.size()) {
        throw Error(ErrorCode::TrunkShapeMismatch, "need one trunk per class and at least two classes (" +
                                                       std::to_string(trunks.size()) + " trunks, " +
                                                       std::to_string(classes) + " classes)");
    }
    for (std::size_t i = 0; i < trunks.size(); ++i) {
        const auto& t = trunks[i];
        if (t.input_shape() != kImageShape || t.output_shape() != nn::Shape{kTrunkWidth}) {
            throw Error(ErrorCode::TrunkShapeMismatch, "trunk " + std::to_string(i) + " maps " +
                                                           nn::shape_string(t.input_shape()) + " to " +
                                                           nn::shape_string(t.output_shape()));
        }
        for (const auto& p : t.parameters()) {
            if (p.trainable) {
                throw Error(ErrorCode::TrainableTrunk, "trunk " + std::to_string(i) + " parameter " + p.name +
                                                           " is trainable");
            }
        }
    }
}

std::vector<int> nodes_with_prefix(const nn::Graph& g, const std::string& prefix) {
    std::vector<int> ids;
    for (std::size_t i = 0; i < g.nodes().size(); ++i) {
        if (g.nodes()[i].name.starts_with(prefix)) {
            ids.push_back(static_cast<int>(i));
        }
    }
    return ids;
}

} // namespace

bool IntegratedModel::is_trunk_parameter(std::size_t index) const {
    return !graph.parameters().at(index).name.starts_with("meta/");
}

IntegratedModel build_integrated(std::span<const nn::Graph> trunks, std::vector<std::string> class_names,
                                 std::uint64_t seed, const MetaHeadConfig& head) {
    validate_trunks(trunks, class_names.size());
    return assemble(trunks, std::move(class_names), build_meta_head(trunks.size(), seed, head));
}

nn::Graph extract_trunk(const IntegratedModel& model, std::size_t index) {
    const std::string prefix = trunk_prefix(index);
    return model.graph.extract(nodes_with_prefix(model.graph, prefix), model.trunk_outputs.at(index), prefix);
}

nn::Graph extract_meta_head(const IntegratedModel& model) {
    auto ids = nodes_with_prefix(model.graph, "meta/");
    std::erase(ids, model.concat);
    return model.graph.extract(ids, model.graph.output(), "meta/");
}

nn::Tensor trunk_features(const IntegratedModel& model, const nn::Tensor& images) {
    const std::size_t n = images.dim(0);
    const std::size_t width = kTrunkWidth * model.class_count();
    nn::Tensor out({n, width});
    constexpr std::size_t kChunk = 256;
    for (std::size_t begin = 0; begin < n; begin += kChunk) {
        const std::size_t count = std::min(kChunk, n - begin);
        const nn::Tensor f = model.graph.infer_until(nn::slice_rows(images, begin, count), model.concat);
        std::copy(f.values().begin(), f.values().end(), out.data() + begin * width);
    }
    return out;
}

TrainReport train_meta(IntegratedModel& model, const image::ImageDataset& d2, const TrainConfig& config) {
    if (d2.size() == 0) {
        throw Error(ErrorCode::EmptyDataset, "meta training set is empty");
    }
    const std::size_t classes = model.class_count();
    nn::Tensor targets({d2.size(), classes});
    for (std::size_t i = 0; i < d2.size(); ++i) {
        if (d2.labels[i] >= classes) {
            throw Error(ErrorCode::ClassOutOfRange, "label " + std::to_string(d2.labels[i]) + " but the model has " +
                                                        std::to_string(classes) + " classes");
        }
        targets[i * classes + d2.labels[i]] = 1.0f;
    }
    const nn::Tensor features = trunk_features(model, d2.tensor());
    auto loss = [&](const nn::Tensor& out, std::span<const std::size_t> rows) {
        return nn::categorical_cross_entropy(out, nn::gather_rows(targets, rows));
    };
    TrainReport report;
    nn::FitConfig fit{config.epochs, config.batch_size, config.adam, config.seed};
    report.epoch_loss = nn::fit(model.graph, features, loss, fit, model.concat);
    return report;
}

std::uint16_t argmax(std::span<const float> values) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] > values[best]) {
            best = i;
        }
    }
    return static_cast<std::uint16_t>(best);
}

nn::Tensor predict_probabilities(const IntegratedModel& model, const nn::Tensor& images) {
    return nn::predict_batched(model.graph, images);
}

std::vector<std::uint16_t> predict_classes(const IntegratedModel& model, const nn::Tensor& images) {
    const nn::Tensor p = predict_probabilities(model, images);
    const std::size_t k = model.class_count();
    std::vector<std::uint16_t> out(images.dim(0));
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = argmax(std::span<const float>(p.data() + i * k, k));
    }
    return out;
}

Prediction predict(const IntegratedModel& model, std::span<const float> image) {
    if (image.size() != image::kPixels) {
        throw Error(ErrorCode::ShapeMismatch, "image must have 256 pixels");
    }
    const nn::Tensor batch({1, image::kSide, image::kSide, 1}, std::vector<float>(image.begin(), image.end()));
    const nn::Tensor p = model.graph.infer(batch);
    Prediction out;
    out.probabilities.assign(p.values().begin(), p.values().end());
    out.class_id = argmax(out.probabilities);
    out.class_name = model.class_names.at(out.class_id);
    return out;
}

namespace {

constexpr const char* kBundleHeader = "bsid-bundle 1";

// Checkpoints end in the CRC of their body, and a CRC taken over data
// followed by its own CRC is the same for every input of a given length. The
// manifest therefore records the CRC of the body alone.
std::string file_crc(std::span<const std::uint8_t> bytes) {
    const auto body = bytes.size() >= 4 ? bytes.first(bytes.size() - 4) : bytes;
    char out[9];
    std::snprintf(out, sizeof out, "%08x", crc32(body));
    return out;
}

} // namespace

void save_integrated(const IntegratedModel& model, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    std::vector<std::pair<std::string, std::vector<std::uint8_t>>> files;
    for (std::size_t i = 0; i < model.class_count(); ++i) {
        files.emplace_back(base_checkpoint_name(static_cast<std::uint16_t>(i)),
                           nn::save_checkpoint(extract_trunk(model, i)));
    }
    files.emplace_back("meta.bsnn", nn::save_checkpoint(extract_meta_head(model)));

    std::ostringstream manifest;
    manifest << kBundleHeader << '\n' << "classes " << model.class_count() << '\n';
    for (std::size_t i = 0; i < model.class_count(); ++i) {
        manifest << "class " << i << ' ' << model.class_names[i] << '\n';
    }
    for (const auto& [name, bytes] : files) {
        write_file((fs::path(dir) / name).string(), bytes);
        manifest << "file " << name << ' ' << file_crc(bytes) << '\n';
    }
    const std::string text = manifest.str();
    write_file((fs::path(dir) / "manifest").string(),
               std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

IntegratedModel load_integrated(const std::string& dir) {
    namespace fs = std::filesystem;
    std::ifstream in(fs::path(dir) / "manifest");
    if (!in) {
        throw Error(ErrorCode::ManifestMismatch, "no manifest in " + dir);
    }
    auto bad = [&](const std::string& why) { return Error(ErrorCode::ManifestMismatch, dir + "/manifest: " + why); };
    std::string line;
    if (!std::getline(in, line) || line != kBundleHeader) {
        throw bad("unrecognised header");
    }
    std::size_t classes = 0;
    std::vector<std::string> names;
    std::vector<std::pair<std::string, std::string>> listed;  // file, crc
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        std::istringstream row(line);
        std::string key;
        row >> key;
        if (key == "classes") {
            row >> classes;
        } else if (key == "class") {
            std::size_t id = 0;
            row >> id;
            std::string name;
            std::getline(row, name);
            if (id != names.size() || name.size() < 2) {
                throw bad("class lines out of order");
            }
            names.push_back(name.substr(1));
        } else if (key == "file") {
            std::string file, crc;
            row >> file >> crc;
            listed.emplace_back(file, crc);
        } else {
            throw bad("unknown key '" + key + "'");
        }
        if (row.fail()) {
            throw bad("malformed line '" + line + "'");
        }
    }
    if (classes < 2 || names.size() != classes) {
        throw bad("class count " + std::to_string(classes) + " with " + std::to_string(names.size()) + " names");
    }

    auto load = [&](const std::string& file) {
        const auto it = std::find_if(listed.begin(), listed.end(), [&](const auto& e) { return e.first == file; });
        if (it == listed.end()) {
            throw bad(file + " not listed");
        }
        const fs::path path = fs::path(dir) / file;
        if (!fs::exists(path)) {
            throw bad(file + " is missing");
        }
        const auto bytes = read_file(path.string());
        if (file_crc(bytes) != it->second) {
            throw Error(ErrorCode::ChecksumMismatch, file + " does not match its manifest CRC");
        }
        return nn::load_checkpoint(bytes);
    };

    std::size_t trunk_files = 0;
    for (const auto& [file, crc] : listed) {
        trunk_files += file.starts_with("base_") ? 1 : 0;
    }
    if (trunk_files != classes) {
        throw bad(std::to_string(trunk_files) + " trunk files for " + std::to_string(classes) + " classes");
    }
    std::vector<nn::Graph> trunks;
    for (std::size_t i = 0; i < classes; ++i) {
        trunks.push_back(load(base_checkpoint_name(static_cast<std::uint16_t>(i))));
    }
    const nn::Graph meta = load("meta.bsnn");
    validate_trunks(trunks, classes);
    if (meta.input_shape() != nn::Shape{kTrunkWidth * classes} || meta.output_shape() != nn::Shape{classes}) {
        throw bad("meta head does not match " + std::to_string(classes) + " classes");
    }
    return assemble(trunks, std::move(names), meta);
}

} // namespace bsid::model
