// Command-line front end: synth, ingest, transform, train-base, train-meta,
// evaluate, predict. Usage errors exit 2, data errors exit 1.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "bsid/capture/dataset.hpp"
#include "bsid/capture/flow_labels.hpp"
#include "bsid/capture/pcap.hpp"
#include "bsid/capture/synth.hpp"
#include "bsid/eval/evaluate.hpp"
#include "bsid/image/dataset.hpp"
#include "bsid/image/transform.hpp"
#include "bsid/model/settings.hpp"
#include "bsid/nn/checkpoint.hpp"
#include "bsid/util/binary_io.hpp"

namespace fs = std::filesystem;
using namespace bsid;

namespace {

struct Globals {
    std::uint64_t seed = 0;
    std::string config_path;

    model::PipelineSettings settings() const {
        return model::load_settings(config_path.empty() ? Config{} : Config::load(config_path));
    }
};

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw Error(ErrorCode::IoError, "cannot create " + dir + ": " + ec.message());
    }
}

std::string join(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

void print_losses(const char* what, const std::vector<double>& losses) {
    for (std::size_t e = 0; e < losses.size(); ++e) {
        std::printf("%s epoch %zu/%zu loss %.6f\n", what, e + 1, losses.size(), losses[e]);
    }
}

// --- synth ---------------------------------------------------------------

struct SynthArgs {
    std::string out;
    std::size_t per_class = 2000;
    std::size_t classes = 4;
};

void run_synth(const SynthArgs& a, const Globals& g) {
    ensure_dir(a.out);
    capture::SynthConfig cfg;
    cfg.classes = a.classes;
    cfg.packets_per_class = a.per_class;
    cfg.seed = g.seed;
    const auto s = capture::write_synthetic_corpus(cfg, join(a.out, "capture.pcap"), join(a.out, "flows.csv"));
    std::printf("wrote %zu frames on %zu flows to %s\n", s.frames, s.flows, a.out.c_str());
}

// --- ingest --------------------------------------------------------------

struct IngestArgs {
    std::string pcap, labels, out;
    std::optional<std::string> benign;
    std::optional<double> benign_ratio;
    capture::ColumnMap columns;
    std::string delimiter = ",";
};

void run_ingest(const IngestArgs& a, const Globals& g) {
    const auto settings = g.settings();
    if (a.delimiter.size() != 1) {
        throw Error(ErrorCode::InvalidArgument, "--delimiter must be a single character");
    }
    capture::ColumnMap columns = a.columns;
    columns.delimiter = a.delimiter[0];

    capture::ParseStats ps;
    const auto packets = capture::parse_capture_file(a.pcap, &ps);
    const auto table = capture::load_flow_labels_file(a.labels, columns);

    std::vector<capture::LabeledPacket> labeled;
    std::size_t unmatched = 0;
    for (const auto& p : packets) {
        if (auto hit = capture::label_packet(p, table)) {
            labeled.push_back(std::move(*hit));
        } else {
            ++unmatched;
        }
    }
    capture::PrepareStats prep;
    const std::string benign = a.benign.value_or(settings.benign_class);
    auto prepared = capture::prepare_dataset(labeled, table.class_names, benign,
                                             a.benign_ratio.value_or(settings.benign_ratio),
                                             model::prepare_seed(g.seed), &prep);
    ensure_dir(a.out);
    capture::write_manifest_file(join(a.out, "packets.csv"), prepared);
    const auto split = capture::split_dataset(std::move(prepared), model::split_seed(g.seed));
    capture::write_manifest_file(join(a.out, "d1.csv"), split.d1);
    capture::write_manifest_file(join(a.out, "d2.csv"), split.d2);
    capture::write_manifest_file(join(a.out, "d3.csv"), split.d3);
    capture::write_class_names(join(a.out, "classes.txt"), table.class_names);

    std::printf("frames %zu, decoded %zu, truncated %zu, unsupported %zu, clipped %zu\n", ps.frames, ps.packets,
                ps.truncated, ps.unsupported, ps.clipped);
    std::printf("flow rows %zu, conflicts %zu, bad rows %zu, classes %zu\n", table.rows, table.conflicts,
                table.row_errors, table.class_names.size());
    std::printf("labeled %zu, unmatched %zu, empty %zu, duplicates %zu, benign dropped %zu\n", labeled.size(),
                unmatched, prep.empty_removed, prep.duplicates_removed, prep.benign_removed);
    std::printf("split d1 %zu, d2 %zu, d3 %zu -> %s\n", split.d1.size(), split.d2.size(), split.d3.size(),
                a.out.c_str());
}

// --- transform -----------------------------------------------------------

struct TransformArgs {
    std::string manifest, classes, out;
};

void run_transform(const TransformArgs& a) {
    const auto names = capture::read_class_names(a.classes);
    const auto records = capture::read_manifest_file(a.manifest);
    const auto data = image::transform_manifest(records, static_cast<std::uint16_t>(names.size()));
    image::write_dataset_file(a.out, data);
    std::printf("%zu images, %zu classes -> %s\n", data.size(), names.size(), a.out.c_str());
}

// --- train-base ----------------------------------------------------------

struct TrainBaseArgs {
    std::string data, classes, out;
    int class_id = -1;
};

void run_train_base(const TrainBaseArgs& a, const Globals& g) {
    const auto settings = g.settings();
    const auto names = capture::read_class_names(a.classes);
    const auto data = image::read_dataset_file(a.data);
    if (a.class_id < 0 || static_cast<std::size_t>(a.class_id) >= names.size()) {
        throw Error(ErrorCode::ClassOutOfRange,
                    "class " + std::to_string(a.class_id) + " of " + std::to_string(names.size()));
    }
    const auto k = static_cast<std::uint16_t>(a.class_id);
    const auto view = model::to_one_vs_all(data, k);

    nn::Graph net = model::build_base_model(model::base_init_seed(g.seed, k));
    model::TrainConfig cfg = settings.base;
    cfg.seed = model::base_train_seed(g.seed, k);
    const auto start = std::chrono::steady_clock::now();
    const auto report = model::train_base_learner(net, view, cfg);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    ensure_dir(a.out);
    const std::string file = model::base_checkpoint_name(k);
    nn::save_checkpoint_file(net, join(a.out, file));
    model::upsert_base_manifest(a.out, {k, names[k], file});
    print_losses(names[k].c_str(), report.epoch_loss);
    std::printf("class %u (%s): %zu positives of %zu, positive weight %g, %.1fs -> %s\n", unsigned{k},
                names[k].c_str(), view.positives, data.size(), report.positive_weight, secs,
                join(a.out, file).c_str());
}

// --- train-meta ----------------------------------------------------------

struct TrainMetaArgs {
    std::string base, data, out;
};

void run_train_meta(const TrainMetaArgs& a, const Globals& g) {
    const auto settings = g.settings();
    const auto entries = model::read_base_manifest(a.base);
    if (entries.size() < 2) {
        throw Error(ErrorCode::ManifestMismatch, a.base + ": need at least two trained base learners");
    }
    std::vector<nn::Graph> trunks;
    std::vector<std::string> names;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (entries[i].class_id != i) {
            throw Error(ErrorCode::ManifestMismatch,
                        a.base + ": no base learner for class " + std::to_string(i));
        }
        trunks.push_back(model::freeze_and_truncate(nn::load_checkpoint_file(join(a.base, entries[i].file))));
        names.push_back(entries[i].class_name);
    }
    const auto d2 = image::read_dataset_file(a.data);
    if (d2.class_count != names.size()) {
        throw Error(ErrorCode::ManifestMismatch, a.data + " has " + std::to_string(d2.class_count) +
                                                     " classes but " + std::to_string(names.size()) +
                                                     " base learners were found");
    }
    auto m = model::build_integrated(trunks, names, model::meta_init_seed(g.seed), settings.head);
    model::TrainConfig cfg = settings.meta;
    cfg.seed = model::meta_train_seed(g.seed);
    const auto report = model::train_meta(m, d2, cfg);
    model::save_integrated(m, a.out);
    print_losses("meta", report.epoch_loss);
    std::printf("integrated model with %zu classes, %zu trainable parameters -> %s\n", m.class_count(),
                m.graph.parameter_count(true), a.out.c_str());
}

// --- evaluate ------------------------------------------------------------

struct EvaluateArgs {
    std::string model, data, report;
};

void run_evaluate(const EvaluateArgs& a) {
    const auto m = model::load_integrated(a.model);
    const auto d3 = image::read_dataset_file(a.data);
    if (d3.class_count != m.class_count()) {
        throw Error(ErrorCode::ManifestMismatch, a.data + " has " + std::to_string(d3.class_count) +
                                                     " classes, the model " + std::to_string(m.class_count()));
    }
    const auto e = eval::evaluate(m, d3);
    std::cout << eval::format_report(e.report, e.confusion, m.class_names);
    if (!a.report.empty()) {
        const std::string text = eval::format_metrics_file(e.report, e.confusion);
        write_file(a.report, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
    }
    std::printf("macro_f1=%.6f\n", e.report.macro_f1);
}

// --- predict -------------------------------------------------------------

struct PredictArgs {
    std::string model, data, pcap, hex;
};

void print_prediction(std::size_t index, const model::Prediction& p) {
    std::printf("%zu\t%s", index, p.class_name.c_str());
    for (float v : p.probabilities) {
        std::printf("\t%.6f", v);
    }
    std::printf("\n");
}

void run_predict(const PredictArgs& a) {
    const auto m = model::load_integrated(a.model);
    if (!a.data.empty()) {
        const auto d = image::read_dataset_file(a.data);
        for (std::size_t i = 0; i < d.size(); ++i) {
            print_prediction(i, model::predict(m, d.image(i)));
        }
    } else if (!a.pcap.empty()) {
        std::size_t i = 0;
        for (const auto& p : capture::parse_capture_file(a.pcap)) {
            if (!p.payload.empty()) {
                print_prediction(i, model::predict(m, image::transform_payload(p.payload).pixels));
            }
            ++i;  // frame index among decoded packets
        }
    } else {
        const auto bytes = capture::hex_decode(a.hex);
        if (!bytes) {
            throw Error(ErrorCode::InvalidArgument, "--hex is not a hex string");
        }
        print_prediction(0, model::predict(m, image::transform_payload(*bytes).pixels));
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Packet payload intrusion classifier: byte-frequency images and stacked CNN learners"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--seed", g.seed, "Run seed (64-bit)");
    app.add_option("--config", g.config_path, "key=value settings file")->check(CLI::ExistingFile);

    SynthArgs synth;
    auto* c_synth = app.add_subcommand("synth", "Write a synthetic labelled capture (capture.pcap, flows.csv)");
    c_synth->add_option("--out", synth.out, "Output directory")->required();
    c_synth->add_option("--per-class", synth.per_class, "Payload packets per class")->check(CLI::Range(1, 10000000));
    c_synth->add_option("--classes", synth.classes, "Number of classes")->check(CLI::Range(2, 4));

    IngestArgs ingest;
    auto* c_ingest = app.add_subcommand("ingest", "Label packets by flow, clean and split into D1/D2/D3");
    c_ingest->add_option("--pcap", ingest.pcap, "Capture file")->required()->check(CLI::ExistingFile);
    c_ingest->add_option("--labels", ingest.labels, "Flow label table")->required()->check(CLI::ExistingFile);
    c_ingest->add_option("--out", ingest.out, "Output directory")->required();
    c_ingest->add_option("--benign", ingest.benign, "Name of the benign class (default BENIGN)");
    c_ingest->add_option("--benign-ratio", ingest.benign_ratio, "Benign cap relative to attacks (default 1.0)");
    c_ingest->add_option("--col-src-ip", ingest.columns.src_addr, "Source address column");
    c_ingest->add_option("--col-src-port", ingest.columns.src_port, "Source port column");
    c_ingest->add_option("--col-dst-ip", ingest.columns.dst_addr, "Destination address column");
    c_ingest->add_option("--col-dst-port", ingest.columns.dst_port, "Destination port column");
    c_ingest->add_option("--col-protocol", ingest.columns.protocol, "Protocol column");
    c_ingest->add_option("--col-label", ingest.columns.label, "Label column");
    c_ingest->add_option("--delimiter", ingest.delimiter, "Field delimiter");

    TransformArgs transform;
    auto* c_transform = app.add_subcommand("transform", "Turn a packet manifest into 16x16 byte-frequency images");
    c_transform->add_option("--manifest", transform.manifest, "Manifest from ingest")->required();
    c_transform->add_option("--classes", transform.classes, "classes.txt from ingest")->required();
    c_transform->add_option("--out", transform.out, "Image dataset file")->required();

    TrainBaseArgs train_base;
    auto* c_base = app.add_subcommand("train-base", "Train the one-vs-all base learner for one class");
    c_base->add_option("--data", train_base.data, "D1 image dataset")->required();
    c_base->add_option("--classes", train_base.classes, "classes.txt")->required();
    c_base->add_option("--class", train_base.class_id, "Class id")->required();
    c_base->add_option("--out", train_base.out, "Base learner directory")->required();

    TrainMetaArgs train_meta;
    auto* c_meta = app.add_subcommand("train-meta", "Stack frozen base learners and train the meta head");
    c_meta->add_option("--base", train_meta.base, "Base learner directory")->required();
    c_meta->add_option("--data", train_meta.data, "D2 image dataset")->required();
    c_meta->add_option("--out", train_meta.out, "Model bundle directory")->required();

    EvaluateArgs evaluate;
    auto* c_eval = app.add_subcommand("evaluate", "Score a model bundle on D3");
    c_eval->add_option("--model", evaluate.model, "Model bundle directory")->required();
    c_eval->add_option("--data", evaluate.data, "D3 image dataset")->required();
    c_eval->add_option("--report", evaluate.report, "Write key=value metrics here");

    PredictArgs predict;
    auto* c_predict = app.add_subcommand("predict", "Classify images, capture packets or one hex payload");
    c_predict->add_option("--model", predict.model, "Model bundle directory")->required();
    auto* in_data = c_predict->add_option("--data", predict.data, "Image dataset file");
    auto* in_pcap = c_predict->add_option("--pcap", predict.pcap, "Capture file");
    auto* in_hex = c_predict->add_option("--hex", predict.hex, "Payload bytes as hex");
    in_data->excludes(in_pcap)->excludes(in_hex);
    in_pcap->excludes(in_hex);

    // global options may also follow the subcommand name
    for (auto* sub : app.get_subcommands({})) {
        sub->fallthrough();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    if (*c_predict && predict.data.empty() && predict.pcap.empty() && predict.hex.empty()) {
        std::fprintf(stderr, "predict: one of --data, --pcap or --hex is required\n");
        return 2;
    }

    try {
        if (*c_synth) run_synth(synth, g);
        if (*c_ingest) run_ingest(ingest, g);
        if (*c_transform) run_transform(transform);
        if (*c_base) run_train_base(train_base, g);
        if (*c_meta) run_train_meta(train_meta, g);
        if (*c_eval) run_evaluate(evaluate);
        if (*c_predict) run_predict(predict);
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
