#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bsid/capture/flow_labels.hpp"

namespace bsid::capture {

struct PrepareStats {
    std::size_t empty_removed = 0;
    std::size_t duplicates_removed = 0;
    std::size_t benign_removed = 0;
};

/// Drops empty payloads, keeps the first of each (payload, class) duplicate
/// group, then caps the benign class at floor(ratio * non-benign) by a seeded
/// uniform draw. Survivors keep their relative order. Idempotent.
/// UnknownBenignClass when `benign_name` is not in `class_names`;
/// InvalidArgument when the ratio is not positive.
std::vector<LabeledPacket> prepare_dataset(std::span<const LabeledPacket> packets,
                                           std::span<const std::string> class_names, std::string_view benign_name,
                                           double benign_cap_ratio, std::uint64_t seed,
                                           PrepareStats* stats = nullptr);

struct DatasetSplit {
    std::vector<LabeledPacket> d1;  // base learners
    std::vector<LabeledPacket> d2;  // meta learner
    std::vector<LabeledPacket> d3;  // evaluation
    std::uint64_t seed = 0;
};

/// Seeded shuffle, then cuts at floor(0.5 n) and floor(0.5 n) + floor(0.2 n).
/// TooFewRecords when n < 10.
DatasetSplit split_dataset(std::vector<LabeledPacket> packets, std::uint64_t seed);

/// Sizes of the three parts for n records.
struct SplitSizes {
    std::size_t d1, d2, d3;
};
constexpr SplitSizes split_sizes(std::size_t n) { return {n / 2, n / 5, n - n / 2 - n / 5}; }

// Labeled-packet manifest: one "class_id,hexpayload" line per record, plus a
// sidecar file with one class name per line in id order.

struct ManifestRecord {
    std::uint16_t class_id = 0;
    std::vector<std::uint8_t> payload;

    bool operator==(const ManifestRecord&) const = default;
};

void write_manifest(std::ostream& out, std::span<const LabeledPacket> packets);
void write_manifest(std::ostream& out, std::span<const ManifestRecord> records);
/// RowParseError on a malformed line (with its line number).
std::vector<ManifestRecord> read_manifest(std::istream& in);

void write_manifest_file(const std::string& path, std::span<const LabeledPacket> packets);
std::vector<ManifestRecord> read_manifest_file(const std::string& path);

void write_class_names(const std::string& path, std::span<const std::string> names);
std::vector<std::string> read_class_names(const std::string& path);

std::string hex_encode(std::span<const std::uint8_t> bytes);
/// nullopt on odd length or a non-hex digit.
std::optional<std::vector<std::uint8_t>> hex_decode(std::string_view text);

} // namespace bsid::capture
