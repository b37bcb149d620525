#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "bsid/capture/pcap.hpp"

namespace bsid::capture {

/// Header names of the columns that make up a flow key and its label. The
/// defaults are the CIC-IDS2017 "GeneratedLabelledFlows" names; header cells
/// are compared after trimming surrounding whitespace.
struct ColumnMap {
    std::string src_addr = "Source IP";
    std::string src_port = "Source Port";
    std::string dst_addr = "Destination IP";
    std::string dst_port = "Destination Port";
    std::string protocol = "Protocol";
    std::string label = "Label";
    char delimiter = ',';
};

struct FlowLabelTable {
    std::unordered_map<FiveTuple, std::uint16_t, FiveTupleHash> entries;  // canonical tuple -> class id
    std::vector<std::string> class_names;                                 // index = class id

    std::size_t rows = 0;        // data rows read
    std::size_t conflicts = 0;   // rows dropped because the tuple already had another label
    std::size_t row_errors = 0;  // RowParseError rows skipped

    std::optional<std::uint16_t> class_id(const std::string& name) const;
    std::optional<std::uint16_t> lookup(const FiveTuple& tuple) const;
};

/// MissingColumn when a mapped header is absent. Malformed rows are counted
/// in row_errors and skipped. Labels enter class_names when their first entry
/// is accepted, so every class has at least one flow.
FlowLabelTable load_flow_labels(std::istream& in, const ColumnMap& columns = {});
FlowLabelTable load_flow_labels_file(const std::string& path, const ColumnMap& columns = {});

/// Splits one delimited line, honouring double-quoted cells ("" escapes a quote).
std::vector<std::string> split_row(const std::string& line, char delimiter);

struct LabeledPacket {
    PacketRecord record;
    std::uint16_t class_id = 0;
};

/// nullopt is the Unmatched outcome: the tuple is in the table in neither direction.
std::optional<LabeledPacket> label_packet(const PacketRecord& record, const FlowLabelTable& table);

} // namespace bsid::capture
