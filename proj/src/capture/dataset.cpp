#include "bsid/capture/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <unordered_set>

#include "bsid/error.hpp"
#include "bsid/util/random.hpp"

namespace bsid::capture {
namespace {

struct PayloadKey {
    const std::vector<std::uint8_t>* payload;
    std::uint16_t class_id;

    bool operator==(const PayloadKey& o) const { return class_id == o.class_id && *payload == *o.payload; }
};

struct PayloadKeyHash {
    std::size_t operator()(const PayloadKey& k) const noexcept {
        // FNV-1a over the bytes, seeded with the class
        std::uint64_t h = 0xCBF29CE484222325ULL ^ k.class_id;
        for (std::uint8_t b : *k.payload) {
            h = (h ^ b) * 0x100000001B3ULL;
        }
        return static_cast<std::size_t>(mix_seed(h));
    }
};

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error(ErrorCode::IoError, "cannot write " + path);
    }
    return out;
}

} // namespace

std::vector<LabeledPacket> prepare_dataset(std::span<const LabeledPacket> packets,
                                           std::span<const std::string> class_names, std::string_view benign_name,
                                           double benign_cap_ratio, std::uint64_t seed, PrepareStats* stats) {
    const auto benign_it = std::find(class_names.begin(), class_names.end(), benign_name);
    if (benign_it == class_names.end()) {
        throw Error(ErrorCode::UnknownBenignClass, "benign class '" + std::string(benign_name) + "' not among labels");
    }
    if (!(benign_cap_ratio > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "benign cap ratio must be positive");
    }
    const auto benign = static_cast<std::uint16_t>(benign_it - class_names.begin());
    PrepareStats local;

    std::vector<std::size_t> kept;
    kept.reserve(packets.size());
    std::unordered_set<PayloadKey, PayloadKeyHash> seen;
    for (std::size_t i = 0; i < packets.size(); ++i) {
        const auto& p = packets[i];
        if (p.record.payload.empty()) {
            ++local.empty_removed;
            continue;
        }
        if (!seen.insert({&p.record.payload, p.class_id}).second) {
            ++local.duplicates_removed;
            continue;
        }
        kept.push_back(i);
    }

    std::vector<std::size_t> benign_rows;
    for (std::size_t i : kept) {
        if (packets[i].class_id == benign) {
            benign_rows.push_back(i);
        }
    }
    const std::size_t attacks = kept.size() - benign_rows.size();
    const auto cap = static_cast<std::size_t>(std::floor(benign_cap_ratio * static_cast<double>(attacks)));
    std::vector<bool> drop(packets.size(), false);
    if (benign_rows.size() > cap) {
        Rng rng(seed);
        rng.shuffle(std::span<std::size_t>(benign_rows));
        for (std::size_t j = cap; j < benign_rows.size(); ++j) {
            drop[benign_rows[j]] = true;
        }
        local.benign_removed = benign_rows.size() - cap;
    }

    std::vector<LabeledPacket> out;
    out.reserve(kept.size() - local.benign_removed);
    for (std::size_t i : kept) {
        if (!drop[i]) {
            out.push_back(packets[i]);
        }
    }
    if (stats != nullptr) {
        *stats = local;
    }
    return out;
}

DatasetSplit split_dataset(std::vector<LabeledPacket> packets, std::uint64_t seed) {
    const std::size_t n = packets.size();
    if (n < 10) {
        throw Error(ErrorCode::TooFewRecords, "need at least 10 records to split, got " + std::to_string(n));
    }
    Rng rng(seed);
    rng.shuffle(std::span<LabeledPacket>(packets));
    const SplitSizes s = split_sizes(n);
    DatasetSplit out;
    out.seed = seed;
    auto first = std::make_move_iterator(packets.begin());
    out.d1.assign(first, first + static_cast<std::ptrdiff_t>(s.d1));
    out.d2.assign(first + static_cast<std::ptrdiff_t>(s.d1), first + static_cast<std::ptrdiff_t>(s.d1 + s.d2));
    out.d3.assign(first + static_cast<std::ptrdiff_t>(s.d1 + s.d2), std::make_move_iterator(packets.end()));
    return out;
}

std::string hex_encode(std::span<const std::uint8_t> bytes) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string s(bytes.size() * 2, '0');
    for (std::size_t i = 0; i < bytes.size(); ++i) {
        s[2 * i] = digits[bytes[i] >> 4];
        s[2 * i + 1] = digits[bytes[i] & 0xF];
    }
    return s;
}

std::optional<std::vector<std::uint8_t>> hex_decode(std::string_view text) {
    if (text.size() % 2 != 0) {
        return std::nullopt;
    }
    auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        return -1;
    };
    std::vector<std::uint8_t> out(text.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const int hi = nibble(text[2 * i]), lo = nibble(text[2 * i + 1]);
        if (hi < 0 || lo < 0) {
            return std::nullopt;
        }
        out[i] = static_cast<std::uint8_t>(hi << 4 | lo);
    }
    return out;
}

void write_manifest(std::ostream& out, std::span<const LabeledPacket> packets) {
    for (const auto& p : packets) {
        out << p.class_id << ',' << hex_encode(p.record.payload) << '\n';
    }
}

void write_manifest(std::ostream& out, std::span<const ManifestRecord> records) {
    for (const auto& r : records) {
        out << r.class_id << ',' << hex_encode(r.payload) << '\n';
    }
}

std::vector<ManifestRecord> read_manifest(std::istream& in) {
    std::vector<ManifestRecord> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        const auto comma = line.find(',');
        ManifestRecord rec;
        unsigned long id = 0;
        bool ok = comma != std::string::npos && comma > 0;
        if (ok) {
            const auto [ptr, ec] = std::from_chars(line.data(), line.data() + comma, id);
            ok = ec == std::errc() && ptr == line.data() + comma && id <= 0xFFFF;
        }
        std::optional<std::vector<std::uint8_t>> payload;
        if (ok) {
            payload = hex_decode(std::string_view(line).substr(comma + 1));
        }
        if (!payload) {
            throw Error(ErrorCode::RowParseError, "manifest line " + std::to_string(line_no) + " is malformed");
        }
        rec.class_id = static_cast<std::uint16_t>(id);
        rec.payload = std::move(*payload);
        out.push_back(std::move(rec));
    }
    return out;
}

void write_manifest_file(const std::string& path, std::span<const LabeledPacket> packets) {
    auto out = open_out(path);
    write_manifest(out, packets);
    if (!out) {
        throw Error(ErrorCode::IoError, "write failed: " + path);
    }
}

std::vector<ManifestRecord> read_manifest_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open " + path);
    }
    return read_manifest(in);
}

void write_class_names(const std::string& path, std::span<const std::string> names) {
    auto out = open_out(path);
    for (const auto& n : names) {
        out << n << '\n';
    }
    if (!out) {
        throw Error(ErrorCode::IoError, "write failed: " + path);
    }
}

std::vector<std::string> read_class_names(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open " + path);
    }
    std::vector<std::string> names;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (!line.empty()) {
            names.push_back(line);
        }
    }
    return names;
}

} // namespace bsid::capture
