#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace bsid::capture {

struct IpAddress {
    std::uint8_t family = 4;                // 4 or 6
    std::array<std::uint8_t, 16> bytes{};   // IPv4 uses the first four

    static IpAddress v4(std::uint8_t a, std::uint8_t b, std::uint8_t c, std::uint8_t d) {
        IpAddress ip;
        ip.bytes[0] = a;
        ip.bytes[1] = b;
        ip.bytes[2] = c;
        ip.bytes[3] = d;
        return ip;
    }

    /// Dotted quad or RFC 4291 text; nullopt when neither parses.
    static std::optional<IpAddress> parse(std::string_view text);
    std::string to_string() const;

    auto operator<=>(const IpAddress&) const = default;
};

inline constexpr std::uint8_t kProtoIcmp = 1;
inline constexpr std::uint8_t kProtoTcp = 6;
inline constexpr std::uint8_t kProtoUdp = 17;
inline constexpr std::uint8_t kProtoIcmpV6 = 58;

struct FiveTuple {
    IpAddress src;
    IpAddress dst;
    std::uint16_t src_port = 0;
    std::uint16_t dst_port = 0;
    std::uint8_t protocol = 0;

    FiveTuple reversed() const { return {dst, src, dst_port, src_port, protocol}; }

    /// Orders the two (address, port) endpoints so that a tuple and its
    /// reverse map to the same value.
    FiveTuple canonical() const;

    std::string to_string() const;

    auto operator<=>(const FiveTuple&) const = default;
};

struct FiveTupleHash {
    std::size_t operator()(const FiveTuple& t) const noexcept;
};

} // namespace bsid::capture
