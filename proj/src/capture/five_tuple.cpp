#include "bsid/capture/five_tuple.hpp"

#include <arpa/inet.h>

#include <tuple>

#include "bsid/util/random.hpp"

namespace bsid::capture {

std::optional<IpAddress> IpAddress::parse(std::string_view text) {
    const std::string s(text);
    IpAddress ip;
    if (inet_pton(AF_INET, s.c_str(), ip.bytes.data()) == 1) {
        ip.family = 4;
        return ip;
    }
    if (inet_pton(AF_INET6, s.c_str(), ip.bytes.data()) == 1) {
        ip.family = 6;
        return ip;
    }
    return std::nullopt;
}

std::string IpAddress::to_string() const {
    char buf[INET6_ADDRSTRLEN] = {};
    inet_ntop(family == 4 ? AF_INET : AF_INET6, bytes.data(), buf, sizeof buf);
    return buf;
}

FiveTuple FiveTuple::canonical() const {
    if (std::tie(dst, dst_port) < std::tie(src, src_port)) {
        return reversed();
    }
    return *this;
}

std::string FiveTuple::to_string() const {
    return src.to_string() + ":" + std::to_string(src_port) + " -> " + dst.to_string() + ":" +
           std::to_string(dst_port) + " proto " + std::to_string(protocol);
}

std::size_t FiveTupleHash::operator()(const FiveTuple& t) const noexcept {
    std::uint64_t h = mix_seed(t.protocol);
    for (const IpAddress* ip : {&t.src, &t.dst}) {
        std::uint64_t lo = ip->family, hi = 0;
        for (int i = 0; i < 8; ++i) {
            lo = lo * 131 + ip->bytes[i];
            hi = hi * 131 + ip->bytes[8 + i];
        }
        h = mix_seed(h ^ lo) ^ mix_seed(hi + 1);
    }
    h = mix_seed(h ^ (std::uint64_t{t.src_port} << 16 | t.dst_port));
    return static_cast<std::size_t>(h);
}

} // namespace bsid::capture
