#include "bsid/nn/checkpoint.hpp"

#include <cstring>

#include "bsid/util/binary_io.hpp"

namespace bsid::nn {
namespace {

constexpr char kMagic[4] = {'B', 'S', 'N', 'N'};

void put_shape(ByteWriter& w, const Shape& shape) {
    w.put(static_cast<std::uint8_t>(shape.size()));
    for (std::size_t d : shape) {
        w.put(static_cast<std::uint32_t>(d));
    }
}

Shape get_shape(ByteReader& r) {
    Shape shape(r.get<std::uint8_t>());
    for (auto& d : shape) {
        d = r.get<std::uint32_t>();
    }
    return shape;
}

} // namespace

std::vector<std::uint8_t> save_checkpoint(const Graph& graph) {
    ByteWriter w;
    w.put_bytes({reinterpret_cast<const std::uint8_t*>(kMagic), 4});
    w.put(kCheckpointVersion);
    w.put(graph.seed());
    w.put(graph.dropout_counter());
    put_shape(w, graph.input_shape());

    w.put(static_cast<std::uint32_t>(graph.nodes().size()));
    for (const Node& node : graph.nodes()) {
        ByteWriter rec;
        rec.put(static_cast<std::uint8_t>(node.spec.kind));
        rec.put_string(node.name);
        rec.put(node.spec.units);
        rec.put(node.spec.stride);
        rec.put(node.spec.rate);
        rec.put(node.spec.epsilon);
        rec.put(node.spec.momentum);
        rec.put(static_cast<std::uint8_t>(node.pinned_infer ? 1 : 0));
        rec.put(static_cast<std::uint16_t>(node.inputs.size()));
        for (int in : node.inputs) {
            rec.put(static_cast<std::int32_t>(in));
        }
        w.put(static_cast<std::uint32_t>(rec.size()));
        w.put_bytes(rec.bytes());
    }
    w.put(static_cast<std::int32_t>(graph.output()));

    w.put(static_cast<std::uint32_t>(graph.parameters().size()));
    for (const auto& p : graph.parameters()) {
        w.put_string(p.name);
        w.put(static_cast<std::uint8_t>(p.role));
        w.put(static_cast<std::uint8_t>(p.trainable ? 1 : 0));
        put_shape(w, p.value.shape());
        for (float v : p.value.values()) {
            w.put(v);
        }
    }
    const std::uint32_t crc = crc32(w.bytes());
    w.put(crc);
    return w.take();
}

Graph load_checkpoint(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 5 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
        throw Error(ErrorCode::ChecksumMismatch, "not a checkpoint stream");
    }
    if (bytes[4] != kCheckpointVersion) {
        throw Error(ErrorCode::VersionMismatch,
                    "checkpoint version " + std::to_string(bytes[4]) + ", expected " + std::to_string(kCheckpointVersion));
    }
    if (bytes.size() < 9) {
        throw Error(ErrorCode::ChecksumMismatch, "checkpoint truncated");
    }
    const auto body = bytes.first(bytes.size() - 4);
    ByteReader trailer(bytes.last(4));
    if (trailer.get<std::uint32_t>() != crc32(body)) {
        throw Error(ErrorCode::ChecksumMismatch, "checkpoint CRC does not match its body");
    }

    // The CRC matched, so a malformed body is a writer bug rather than
    // corruption; it still surfaces as ChecksumMismatch.
    ByteReader r(body.subspan(5));
    const auto seed = r.get<std::uint64_t>();
    const auto dropout_counter = r.get<std::uint64_t>();
    Graph graph(get_shape(r), seed);
    graph.set_dropout_counter(dropout_counter);

    const auto node_count = r.get<std::uint32_t>();
    std::vector<bool> pinned;
    for (std::uint32_t i = 0; i < node_count; ++i) {
        const auto length = r.get<std::uint32_t>();
        ByteReader rec(r.get_bytes(length));
        LayerSpec spec;
        spec.kind = static_cast<LayerKind>(rec.get<std::uint8_t>());
        std::string name = rec.get_string();
        spec.units = rec.get<std::uint32_t>();
        spec.stride = rec.get<std::uint32_t>();
        spec.rate = rec.get<float>();
        spec.epsilon = rec.get<float>();
        spec.momentum = rec.get<float>();
        pinned.push_back(rec.get<std::uint8_t>() != 0);
        std::vector<int> inputs(rec.get<std::uint16_t>());
        for (auto& in : inputs) {
            in = rec.get<std::int32_t>();
        }
        graph.add(std::move(name), spec, std::move(inputs));
    }
    graph.set_output(r.get<std::int32_t>());
    for (std::size_t i = 0; i < pinned.size(); ++i) {
        graph.pin_node(static_cast<int>(i), pinned[i]);
    }

    auto& params = graph.parameters();
    const auto param_count = r.get<std::uint32_t>();
    if (param_count != params.size()) {
        throw Error(ErrorCode::ChecksumMismatch, "parameter count does not match the graph descriptor");
    }
    for (auto& p : params) {
        const std::string name = r.get_string();
        const auto role = static_cast<ParamRole>(r.get<std::uint8_t>());
        const bool trainable = r.get<std::uint8_t>() != 0;
        const Shape shape = get_shape(r);
        if (name != p.name || role != p.role || shape != p.value.shape()) {
            throw Error(ErrorCode::ChecksumMismatch, "parameter " + name + " does not match the graph descriptor");
        }
        for (auto& v : p.value.values()) {
            v = r.get<float>();
        }
        p.trainable = trainable;
    }
    if (r.remaining() != 0) {
        throw Error(ErrorCode::ChecksumMismatch, "trailing bytes after parameters");
    }
    return graph;
}

void save_checkpoint_file(const Graph& graph, const std::string& path) { write_file(path, save_checkpoint(graph)); }

Graph load_checkpoint_file(const std::string& path) { return load_checkpoint(read_file(path)); }

} // namespace bsid::nn
