#include "bsid/capture/flow_labels.hpp"

#include <charconv>
#include <fstream>
#include <istream>

#include "bsid/error.hpp"

namespace bsid::capture {
namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

template <typename T>
bool parse_uint(const std::string& s, T max, T& out) {
    unsigned long long v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || v > max) {
        return false;
    }
    out = static_cast<T>(v);
    return true;
}

} // namespace

std::optional<std::uint16_t> FlowLabelTable::class_id(const std::string& name) const {
    for (std::size_t i = 0; i < class_names.size(); ++i) {
        if (class_names[i] == name) {
            return static_cast<std::uint16_t>(i);
        }
    }
    return std::nullopt;
}

std::optional<std::uint16_t> FlowLabelTable::lookup(const FiveTuple& tuple) const {
    const auto it = entries.find(tuple.canonical());
    if (it == entries.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::vector<std::string> split_row(const std::string& line, char delimiter) {
    std::vector<std::string> cells(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cells.back() += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cells.back() += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == delimiter) {
            cells.emplace_back();
        } else if (c != '\r' && c != '\n') {
            cells.back() += c;
        }
    }
    return cells;
}

FlowLabelTable load_flow_labels(std::istream& in, const ColumnMap& columns) {
    FlowLabelTable table;
    std::string line;
    if (!std::getline(in, line)) {
        throw Error(ErrorCode::MissingColumn, "flow-label table has no header row");
    }
    if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF && static_cast<unsigned char>(line[1]) == 0xBB &&
        static_cast<unsigned char>(line[2]) == 0xBF) {
        line.erase(0, 3);
    }
    const auto header = split_row(line, columns.delimiter);
    auto index_of = [&](const std::string& name) {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (trim(header[i]) == trim(name)) {
                return i;
            }
        }
        throw Error(ErrorCode::MissingColumn, "column '" + name + "' not in header");
    };
    const std::size_t c_src = index_of(columns.src_addr), c_sport = index_of(columns.src_port),
                      c_dst = index_of(columns.dst_addr), c_dport = index_of(columns.dst_port),
                      c_proto = index_of(columns.protocol), c_label = index_of(columns.label);
    const std::size_t needed = std::max({c_src, c_sport, c_dst, c_dport, c_proto, c_label}) + 1;

    while (std::getline(in, line)) {
        if (trim(line).empty()) {
            continue;
        }
        ++table.rows;
        const auto cells = split_row(line, columns.delimiter);
        if (cells.size() < needed) {
            ++table.row_errors;
            continue;
        }
        FiveTuple t;
        const auto src = IpAddress::parse(trim(cells[c_src]));
        const auto dst = IpAddress::parse(trim(cells[c_dst]));
        const std::string label = trim(cells[c_label]);
        if (!src || !dst || src->family != dst->family || label.empty() ||
            !parse_uint<std::uint16_t>(trim(cells[c_sport]), 0xFFFF, t.src_port) ||
            !parse_uint<std::uint16_t>(trim(cells[c_dport]), 0xFFFF, t.dst_port) ||
            !parse_uint<std::uint8_t>(trim(cells[c_proto]), 0xFF, t.protocol)) {
            ++table.row_errors;
            continue;
        }
        t.src = *src;
        t.dst = *dst;
        const FiveTuple key = t.canonical();

        const auto existing = table.entries.find(key);
        if (existing != table.entries.end()) {
            if (table.class_names[existing->second] != label) {
                ++table.conflicts;
            }
            continue;
        }
        auto id = table.class_id(label);
        if (!id) {
            if (table.class_names.size() > 0xFFFF) {
                throw Error(ErrorCode::ClassOutOfRange, "more than 65536 distinct labels");
            }
            id = static_cast<std::uint16_t>(table.class_names.size());
            table.class_names.push_back(label);
        }
        table.entries.emplace(key, *id);
    }
    return table;
}

FlowLabelTable load_flow_labels_file(const std::string& path, const ColumnMap& columns) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open " + path);
    }
    return load_flow_labels(in, columns);
}

std::optional<LabeledPacket> label_packet(const PacketRecord& record, const FlowLabelTable& table) {
    const auto id = table.lookup(record.tuple);
    if (!id) {
        return std::nullopt;
    }
    return LabeledPacket{record, *id};
}

} // namespace bsid::capture
