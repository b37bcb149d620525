#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bsid/capture/five_tuple.hpp"
#include "bsid/error.hpp"

namespace bsid::capture {

inline constexpr std::size_t kMaxPayload = 1500;

struct Timestamp {
    std::int64_t seconds = 0;
    std::uint32_t nanoseconds = 0;

    auto operator<=>(const Timestamp&) const = default;
};

struct PacketRecord {
    FiveTuple tuple;
    Timestamp timestamp;
    std::vector<std::uint8_t> payload;  // transport payload, at most kMaxPayload bytes
};

struct ParseStats {
    std::size_t frames = 0;       // records in the capture
    std::size_t packets = 0;      // decoded into a PacketRecord
    std::size_t truncated = 0;    // TruncatedFrame: headers or declared lengths cut short
    std::size_t unsupported = 0;  // not IPv4/IPv6 carrying TCP/UDP/ICMP, or a non-first fragment
    std::size_t clipped = 0;      // payloads cut to kMaxPayload

    std::size_t skipped() const { return truncated + unsupported; }
};

/// Streaming reader for classic libpcap files (microsecond or nanosecond
/// magic, either byte order, Ethernet link type). Frames that cannot be
/// decoded are counted in stats() and skipped.
class PcapReader {
public:
    /// Reads the global header. MalformedHeader on a bad magic, a short header,
    /// or a link type other than Ethernet.
    explicit PcapReader(std::istream& in);

    /// Next decodable packet, or nullopt at the end of the capture.
    std::optional<PacketRecord> next();

    const ParseStats& stats() const { return stats_; }
    bool nanosecond_resolution() const { return nanos_; }

private:
    std::istream& in_;
    bool swapped_ = false;
    bool nanos_ = false;
    ParseStats stats_;
    std::vector<std::uint8_t> frame_;
};

std::vector<PacketRecord> parse_capture(std::istream& in, ParseStats* stats = nullptr);
std::vector<PacketRecord> parse_capture(std::span<const std::uint8_t> bytes, ParseStats* stats = nullptr);
std::vector<PacketRecord> parse_capture_file(const std::string& path, ParseStats* stats = nullptr);

enum class FrameDecode { Ok, Truncated, Unsupported };

/// Decodes one Ethernet frame. `captured_whole` is false when the capture
/// snap length cut the frame, in which case a short payload is not an error.
FrameDecode decode_frame(std::span<const std::uint8_t> frame, bool captured_whole, PacketRecord& out);

/// Builds an Ethernet/IP/transport frame carrying `payload`. The IP version
/// follows tuple.src.family; checksums are left zero.
std::vector<std::uint8_t> build_frame(const FiveTuple& tuple, std::span<const std::uint8_t> payload);

/// Writes a little-endian microsecond-resolution Ethernet capture.
class PcapWriter {
public:
    explicit PcapWriter(std::ostream& out, std::uint32_t snaplen = 65535);

    void write_frame(Timestamp ts, std::span<const std::uint8_t> frame);
    void write_packet(Timestamp ts, const FiveTuple& tuple, std::span<const std::uint8_t> payload) {
        write_frame(ts, build_frame(tuple, payload));
    }

private:
    std::ostream& out_;
    std::uint32_t snaplen_;
};

} // namespace bsid::capture
