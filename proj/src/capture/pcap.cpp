#include "bsid/capture/pcap.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "bsid/error.hpp"
#include "bsid/util/binary_io.hpp"

namespace bsid::capture {
namespace {

constexpr std::uint32_t kMagicMicro = 0xA1B2C3D4;
constexpr std::uint32_t kMagicNano = 0xA1B23C4D;
constexpr std::uint32_t kLinkEthernet = 1;

std::uint32_t le32(const std::uint8_t* p) {
    return std::uint32_t{p[0]} | std::uint32_t{p[1]} << 8 | std::uint32_t{p[2]} << 16 | std::uint32_t{p[3]} << 24;
}

std::uint16_t be16(const std::uint8_t* p) { return static_cast<std::uint16_t>(p[0] << 8 | p[1]); }

std::uint32_t bswap32(std::uint32_t v) {
    return (v >> 24) | ((v >> 8) & 0xFF00) | ((v << 8) & 0xFF0000) | (v << 24);
}

bool read_exact(std::istream& in, std::uint8_t* dst, std::size_t n) {
    in.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(n));
    return static_cast<std::size_t>(in.gcount()) == n;
}

// IPv6 extension headers that may sit between the fixed header and the
// transport header.
bool is_ipv6_extension(std::uint8_t next) { return next == 0 || next == 43 || next == 60 || next == 51 || next == 44; }

} // namespace

PcapReader::PcapReader(std::istream& in) : in_(in) {
    std::uint8_t header[24];
    if (!read_exact(in_, header, sizeof header)) {
        throw Error(ErrorCode::MalformedHeader, "capture shorter than the 24-byte global header");
    }
    const std::uint32_t magic = le32(header);
    if (magic == kMagicMicro || magic == kMagicNano) {
        swapped_ = false;
    } else if (bswap32(magic) == kMagicMicro || bswap32(magic) == kMagicNano) {
        swapped_ = true;
    } else {
        std::ostringstream msg;
        msg << "unrecognised capture magic 0x" << std::hex << magic;
        throw Error(ErrorCode::MalformedHeader, msg.str());
    }
    nanos_ = (swapped_ ? bswap32(magic) : magic) == kMagicNano;
    std::uint32_t link = le32(header + 20);
    if (swapped_) {
        link = bswap32(link);
    }
    // the upper bits of the link field carry FCS flags in newer writers
    if ((link & 0x0FFFFFFF) != kLinkEthernet) {
        throw Error(ErrorCode::MalformedHeader, "link type " + std::to_string(link) + " is not Ethernet");
    }
}

std::optional<PacketRecord> PcapReader::next() {
    for (;;) {
        std::uint8_t rec[16];
        in_.read(reinterpret_cast<char*>(rec), sizeof rec);
        const auto got = static_cast<std::size_t>(in_.gcount());
        if (got == 0) {
            return std::nullopt;
        }
        ++stats_.frames;
        if (got < sizeof rec) {
            ++stats_.truncated;
            return std::nullopt;
        }
        auto field = [&](int i) { return swapped_ ? bswap32(le32(rec + 4 * i)) : le32(rec + 4 * i); };
        const std::uint32_t ts_sec = field(0), ts_frac = field(1), incl = field(2), orig = field(3);
        if (incl > (1u << 24)) {
            // a corrupt length would make us swallow the rest of the file
            ++stats_.truncated;
            return std::nullopt;
        }
        frame_.resize(incl);
        if (!read_exact(in_, frame_.data(), incl)) {
            ++stats_.truncated;
            return std::nullopt;
        }
        PacketRecord out;
        out.timestamp = {static_cast<std::int64_t>(ts_sec), nanos_ ? ts_frac : ts_frac * 1000u};
        switch (decode_frame(frame_, incl >= orig, out)) {
        case FrameDecode::Ok:
            if (out.payload.size() > kMaxPayload) {
                out.payload.resize(kMaxPayload);
                ++stats_.clipped;
            }
            ++stats_.packets;
            return out;
        case FrameDecode::Truncated:
            ++stats_.truncated;
            break;
        case FrameDecode::Unsupported:
            ++stats_.unsupported;
            break;
        }
    }
}

FrameDecode decode_frame(std::span<const std::uint8_t> f, bool captured_whole, PacketRecord& out) {
    if (f.size() < 14) {
        return FrameDecode::Truncated;
    }
    std::size_t off = 12;
    std::uint16_t ethertype = be16(&f[off]);
    off += 2;
    while (ethertype == 0x8100 || ethertype == 0x88A8) {
        if (f.size() < off + 4) {
            return FrameDecode::Truncated;
        }
        ethertype = be16(&f[off + 2]);
        off += 4;
    }

    std::uint8_t proto = 0;
    std::size_t ip_end = 0;  // one past the last byte the IP header says belongs to the packet
    auto& t = out.tuple;
    if (ethertype == 0x0800) {
        if (f.size() < off + 20) {
            return FrameDecode::Truncated;
        }
        const std::uint8_t* ip = &f[off];
        if ((ip[0] >> 4) != 4) {
            return FrameDecode::Unsupported;
        }
        const std::size_t ihl = std::size_t{ip[0] & 0x0Fu} * 4;
        const std::size_t total = be16(ip + 2);
        if (ihl < 20 || total < ihl) {
            return FrameDecode::Truncated;
        }
        if ((be16(ip + 6) & 0x1FFF) != 0) {
            return FrameDecode::Unsupported;  // later fragment: no transport header
        }
        proto = ip[9];
        t.src = IpAddress::v4(ip[12], ip[13], ip[14], ip[15]);
        t.dst = IpAddress::v4(ip[16], ip[17], ip[18], ip[19]);
        ip_end = off + total;
        off += ihl;
    } else if (ethertype == 0x86DD) {
        if (f.size() < off + 40) {
            return FrameDecode::Truncated;
        }
        const std::uint8_t* ip = &f[off];
        if ((ip[0] >> 4) != 6) {
            return FrameDecode::Unsupported;
        }
        const std::size_t plen = be16(ip + 4);
        if (plen == 0) {
            return FrameDecode::Unsupported;  // jumbogram
        }
        proto = ip[6];
        t.src.family = t.dst.family = 6;
        std::copy(ip + 8, ip + 24, t.src.bytes.begin());
        std::copy(ip + 24, ip + 40, t.dst.bytes.begin());
        ip_end = off + 40 + plen;
        off += 40;
        while (is_ipv6_extension(proto)) {
            if (f.size() < off + 8) {
                return FrameDecode::Truncated;
            }
            const std::uint8_t next = f[off];
            std::size_t len = 0;
            if (proto == 44) {
                if ((be16(&f[off + 2]) & 0xFFF8) != 0) {
                    return FrameDecode::Unsupported;
                }
                len = 8;
            } else if (proto == 51) {
                len = (std::size_t{f[off + 1]} + 2) * 4;
            } else {
                len = (std::size_t{f[off + 1]} + 1) * 8;
            }
            proto = next;
            off += len;
        }
    } else {
        return FrameDecode::Unsupported;
    }

    if (ip_end > f.size()) {
        if (captured_whole) {
            return FrameDecode::Truncated;
        }
        ip_end = f.size();
    }
    if (off > ip_end) {
        return FrameDecode::Truncated;
    }
    t.protocol = proto;
    t.src_port = t.dst_port = 0;
    switch (proto) {
    case kProtoTcp: {
        if (ip_end < off + 20) {
            return FrameDecode::Truncated;
        }
        const std::size_t doff = static_cast<std::size_t>(f[off + 12] >> 4) * 4;
        if (doff < 20 || ip_end < off + doff) {
            return FrameDecode::Truncated;
        }
        t.src_port = be16(&f[off]);
        t.dst_port = be16(&f[off + 2]);
        off += doff;
        break;
    }
    case kProtoUdp:
        if (ip_end < off + 8) {
            return FrameDecode::Truncated;
        }
        t.src_port = be16(&f[off]);
        t.dst_port = be16(&f[off + 2]);
        off += 8;
        break;
    case kProtoIcmp:
    case kProtoIcmpV6:
        // type, code, checksum and the 4-byte rest-of-header are not payload
        if (ip_end < off + 8) {
            return FrameDecode::Truncated;
        }
        off += 8;
        break;
    default:
        return FrameDecode::Unsupported;
    }
    out.payload.assign(f.begin() + static_cast<std::ptrdiff_t>(off), f.begin() + static_cast<std::ptrdiff_t>(ip_end));
    return FrameDecode::Ok;
}

std::vector<PacketRecord> parse_capture(std::istream& in, ParseStats* stats) {
    PcapReader reader(in);
    std::vector<PacketRecord> out;
    while (auto rec = reader.next()) {
        out.push_back(std::move(*rec));
    }
    if (stats != nullptr) {
        *stats = reader.stats();
    }
    return out;
}

std::vector<PacketRecord> parse_capture(std::span<const std::uint8_t> bytes, ParseStats* stats) {
    std::istringstream in(std::string(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
    return parse_capture(in, stats);
}

std::vector<PacketRecord> parse_capture_file(const std::string& path, ParseStats* stats) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open " + path);
    }
    return parse_capture(in, stats);
}

std::vector<std::uint8_t> build_frame(const FiveTuple& tuple, std::span<const std::uint8_t> payload) {
    std::vector<std::uint8_t> f;
    auto put16 = [&](std::size_t v) {
        f.push_back(static_cast<std::uint8_t>(v >> 8));
        f.push_back(static_cast<std::uint8_t>(v));
    };
    const bool v6 = tuple.src.family == 6;
    const std::uint8_t dst_mac[6] = {0x02, 0, 0, 0, 0, 0x02};
    const std::uint8_t src_mac[6] = {0x02, 0, 0, 0, 0, 0x01};
    f.insert(f.end(), dst_mac, dst_mac + 6);
    f.insert(f.end(), src_mac, src_mac + 6);
    put16(v6 ? 0x86DD : 0x0800);

    std::size_t l4_header = 8;
    if (tuple.protocol == kProtoTcp) {
        l4_header = 20;
    }
    const std::size_t l4_len = l4_header + payload.size();
    if (v6) {
        f.insert(f.end(), {0x60, 0, 0, 0});
        put16(l4_len);
        f.push_back(tuple.protocol);
        f.push_back(64);
        f.insert(f.end(), tuple.src.bytes.begin(), tuple.src.bytes.end());
        f.insert(f.end(), tuple.dst.bytes.begin(), tuple.dst.bytes.end());
    } else {
        f.push_back(0x45);
        f.push_back(0);
        put16(20 + l4_len);
        f.insert(f.end(), {0, 0, 0x40, 0});  // id 0, don't fragment
        f.push_back(64);
        f.push_back(tuple.protocol);
        put16(0);
        f.insert(f.end(), tuple.src.bytes.begin(), tuple.src.bytes.begin() + 4);
        f.insert(f.end(), tuple.dst.bytes.begin(), tuple.dst.bytes.begin() + 4);
    }

    switch (tuple.protocol) {
    case kProtoTcp:
        put16(tuple.src_port);
        put16(tuple.dst_port);
        f.insert(f.end(), 8, 0);  // seq, ack
        f.push_back(0x50);        // data offset 5
        f.push_back(0x18);        // PSH ACK
        put16(0xFFFF);
        put16(0);
        put16(0);
        break;
    case kProtoUdp:
        put16(tuple.src_port);
        put16(tuple.dst_port);
        put16(l4_len);
        put16(0);
        break;
    default:
        f.insert(f.end(), {8, 0, 0, 0, 0, 1, 0, 1});  // echo request header
        break;
    }
    f.insert(f.end(), payload.begin(), payload.end());
    return f;
}

PcapWriter::PcapWriter(std::ostream& out, std::uint32_t snaplen) : out_(out), snaplen_(snaplen) {
    ByteWriter w;
    w.put(kMagicMicro);
    w.put(std::uint16_t{2});
    w.put(std::uint16_t{4});
    w.put(std::int32_t{0});
    w.put(std::uint32_t{0});
    w.put(snaplen_);
    w.put(kLinkEthernet);
    out_.write(reinterpret_cast<const char*>(w.bytes().data()), static_cast<std::streamsize>(w.size()));
}

void PcapWriter::write_frame(Timestamp ts, std::span<const std::uint8_t> frame) {
    const auto incl = static_cast<std::uint32_t>(std::min<std::size_t>(frame.size(), snaplen_));
    ByteWriter w;
    w.put(static_cast<std::uint32_t>(ts.seconds));
    w.put(ts.nanoseconds / 1000u);
    w.put(incl);
    w.put(static_cast<std::uint32_t>(frame.size()));
    w.put_bytes(frame.first(incl));
    out_.write(reinterpret_cast<const char*>(w.bytes().data()), static_cast<std::streamsize>(w.size()));
    if (!out_) {
        throw Error(ErrorCode::IoError, "capture write failed");
    }
}

} // namespace bsid::capture
