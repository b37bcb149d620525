#include <doctest.h>

#include <sstream>

#include "bsid/capture/dataset.hpp"
#include "bsid/util/random.hpp"

using namespace bsid;
using namespace bsid::capture;

namespace {

using Bytes = std::vector<std::uint8_t>;

void le32(Bytes& b, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) b.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

Bytes global_header(std::uint32_t magic = 0xA1B2C3D4, std::uint32_t link = 1) {
    Bytes b;
    le32(b, magic);
    b.insert(b.end(), {2, 0, 4, 0});
    le32(b, 0);
    le32(b, 0);
    le32(b, 65535);
    le32(b, link);
    return b;
}

void record(Bytes& cap, const Bytes& frame, std::uint32_t sec = 1, std::uint32_t usec = 2) {
    le32(cap, sec);
    le32(cap, usec);
    le32(cap, static_cast<std::uint32_t>(frame.size()));
    le32(cap, static_cast<std::uint32_t>(frame.size()));
    cap.insert(cap.end(), frame.begin(), frame.end());
}

// Ethernet + IPv4 (no options) + TCP (no options), assembled field by field.
Bytes tcp4_frame(const Bytes& payload) {
    Bytes f = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 0x08, 0x00};
    const std::size_t total = 20 + 20 + payload.size();
    f.insert(f.end(), {0x45, 0x00, static_cast<std::uint8_t>(total >> 8), static_cast<std::uint8_t>(total), 0x12,
                       0x34, 0x40, 0x00, 0x40, 0x06, 0x00, 0x00, 10, 0, 0, 1, 192, 168, 1, 7});
    f.insert(f.end(), {0x04, 0xD2, 0x00, 0x50, 0, 0, 0, 1, 0, 0, 0, 0, 0x50, 0x18, 0xFF, 0xFF, 0, 0, 0, 0});
    f.insert(f.end(), payload.begin(), payload.end());
    return f;
}

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::IoError;
}

} // namespace

TEST_CASE("header-only capture") {
    ParseStats stats;
    CHECK(parse_capture(global_header(), &stats).empty());
    CHECK(stats.frames == 0);
    CHECK(stats.skipped() == 0);
}

TEST_CASE("bad magic and link type") {
    CHECK(code_of([] { parse_capture(global_header(0x12345678)); }) == ErrorCode::MalformedHeader);
    CHECK(code_of([] { parse_capture(global_header(0xA1B2C3D4, 101)); }) == ErrorCode::MalformedHeader);
    CHECK(code_of([] { parse_capture(Bytes{0xD4, 0xC3}); }) == ErrorCode::MalformedHeader);
}

TEST_CASE("hand-assembled TCP frame") {
    Bytes cap = global_header();
    record(cap, tcp4_frame({'A', 'B', 'C', 'D'}), 1700000000, 250000);
    const auto recs = parse_capture(cap);
    REQUIRE(recs.size() == 1);
    const auto& r = recs[0];
    CHECK(r.payload == Bytes{'A', 'B', 'C', 'D'});
    CHECK(r.tuple.src == IpAddress::v4(10, 0, 0, 1));
    CHECK(r.tuple.dst == IpAddress::v4(192, 168, 1, 7));
    CHECK(r.tuple.src_port == 1234);
    CHECK(r.tuple.dst_port == 80);
    CHECK(r.tuple.protocol == 6);
    CHECK(r.timestamp.seconds == 1700000000);
    CHECK(r.timestamp.nanoseconds == 250000000u);
}

TEST_CASE("oversized payload is cut to 1500 bytes") {
    Bytes payload(2000);
    for (std::size_t i = 0; i < payload.size(); ++i) payload[i] = static_cast<std::uint8_t>(i * 7);
    Bytes cap = global_header();
    record(cap, tcp4_frame(payload));
    ParseStats stats;
    const auto recs = parse_capture(cap, &stats);
    REQUIRE(recs.size() == 1);
    CHECK(recs[0].payload == Bytes(payload.begin(), payload.begin() + 1500));
    CHECK(stats.clipped == 1);
}

TEST_CASE("byte-swapped and nanosecond headers") {
    for (bool big : {false, true})
        for (bool nano : {false, true}) {
            Bytes cap;
            auto put = [&](std::uint32_t v) {
                for (int i = 0; i < 4; ++i) cap.push_back(static_cast<std::uint8_t>(v >> (big ? 24 - 8 * i : 8 * i)));
            };
            put(nano ? 0xA1B23C4D : 0xA1B2C3D4);
            cap.insert(cap.end(), big ? std::initializer_list<std::uint8_t>{0, 2, 0, 4}
                                      : std::initializer_list<std::uint8_t>{2, 0, 4, 0});
            put(0);
            put(0);
            put(65535);
            put(1);
            const Bytes frame = tcp4_frame({1, 2, 3});
            put(5);
            put(123);
            put(static_cast<std::uint32_t>(frame.size()));
            put(static_cast<std::uint32_t>(frame.size()));
            cap.insert(cap.end(), frame.begin(), frame.end());
            const auto recs = parse_capture(cap);
            REQUIRE(recs.size() == 1);
            CHECK(recs[0].payload == Bytes{1, 2, 3});
            CHECK(recs[0].timestamp.nanoseconds == (nano ? 123u : 123000u));
        }
}

TEST_CASE("broken frames are skipped and counted") {
    Bytes cap = global_header();
    Bytes short_ip = tcp4_frame({9, 9, 9, 9});
    short_ip[17] = 200;  // IP total length beyond the frame
    record(cap, short_ip);
    record(cap, Bytes{1, 2, 3});  // shorter than an Ethernet header
    Bytes arp(60, 0);
    arp[12] = 0x08;
    arp[13] = 0x06;
    record(cap, arp);
    Bytes frag = tcp4_frame({1});
    frag[20] = 0x00;
    frag[21] = 0x10;  // fragment offset 16
    record(cap, frag);
    record(cap, tcp4_frame({'o', 'k'}));
    // trailing record whose body is cut off by end of file
    Bytes tail = tcp4_frame({1, 2, 3, 4, 5});
    le32(cap, 0);
    le32(cap, 0);
    le32(cap, static_cast<std::uint32_t>(tail.size()));
    le32(cap, static_cast<std::uint32_t>(tail.size()));
    cap.insert(cap.end(), tail.begin(), tail.begin() + 10);

    ParseStats stats;
    const auto recs = parse_capture(cap, &stats);
    REQUIRE(recs.size() == 1);
    CHECK(recs[0].payload == Bytes{'o', 'k'});
    CHECK(stats.frames == 6);
    CHECK(stats.truncated == 3);
    CHECK(stats.unsupported == 2);
}

TEST_CASE("VLAN, IPv6 with extension header, UDP and ICMP") {
    FiveTuple t6;
    t6.src = *IpAddress::parse("2001:db8::1");
    t6.dst = *IpAddress::parse("2001:db8::2");
    t6.src_port = 53;
    t6.dst_port = 5353;
    t6.protocol = kProtoUdp;
    Bytes f = build_frame(t6, Bytes{7, 8, 9});
    // splice a hop-by-hop header (8 bytes) after the fixed IPv6 header
    const std::size_t ip = 14;
    Bytes hop = {f[ip + 6], 0, 0, 0, 0, 0, 0, 0};
    f[ip + 6] = 0;
    const std::size_t plen = (f[ip + 4] << 8 | f[ip + 5]) + 8;
    f[ip + 4] = static_cast<std::uint8_t>(plen >> 8);
    f[ip + 5] = static_cast<std::uint8_t>(plen);
    f.insert(f.begin() + ip + 40, hop.begin(), hop.end());
    // and an 802.1Q tag in front of the ethertype
    f.insert(f.begin() + 12, {0x81, 0x00, 0x00, 0x05});

    FiveTuple icmp;
    icmp.src = IpAddress::v4(1, 1, 1, 1);
    icmp.dst = IpAddress::v4(2, 2, 2, 2);
    icmp.protocol = kProtoIcmp;

    Bytes cap = global_header();
    record(cap, f);
    record(cap, build_frame(icmp, Bytes{'p', 'i', 'n', 'g'}));
    const auto recs = parse_capture(cap);
    REQUIRE(recs.size() == 2);
    CHECK(recs[0].tuple == t6);
    CHECK(recs[0].payload == Bytes{7, 8, 9});
    CHECK(recs[1].tuple == icmp);
    CHECK(recs[1].tuple.src_port == 0);
    CHECK(recs[1].payload == Bytes{'p', 'i', 'n', 'g'});
}

TEST_CASE("writer/reader round trip") {
    Rng rng(12);
    std::ostringstream out;
    PcapWriter writer(out);
    std::vector<std::pair<FiveTuple, Bytes>> sent;
    for (int i = 0; i < 300; ++i) {
        FiveTuple t;
        const bool v6 = rng.below(4) == 0;
        t.src.family = t.dst.family = v6 ? 6 : 4;
        for (std::size_t b = 0; b < (v6 ? 16u : 4u); ++b) {
            t.src.bytes[b] = static_cast<std::uint8_t>(rng.below(256));
            t.dst.bytes[b] = static_cast<std::uint8_t>(rng.below(256));
        }
        const std::uint8_t protos[] = {kProtoTcp, kProtoUdp, static_cast<std::uint8_t>(v6 ? kProtoIcmpV6 : kProtoIcmp)};
        t.protocol = protos[rng.below(3)];
        if (t.protocol == kProtoTcp || t.protocol == kProtoUdp) {
            t.src_port = static_cast<std::uint16_t>(rng.below(65536));
            t.dst_port = static_cast<std::uint16_t>(rng.below(65536));
        }
        Bytes p(rng.below(1501));
        for (auto& b : p) b = static_cast<std::uint8_t>(rng.below(256));
        writer.write_packet({i, static_cast<std::uint32_t>(i) * 1000}, t, p);
        sent.emplace_back(t, p);
    }
    const std::string s = out.str();
    ParseStats stats;
    const auto recs = parse_capture(Bytes(s.begin(), s.end()), &stats);
    REQUIRE(recs.size() == sent.size());
    CHECK(stats.skipped() == 0);
    for (std::size_t i = 0; i < sent.size(); ++i) {
        CHECK(recs[i].tuple == sent[i].first);
        CHECK(recs[i].payload == sent[i].second);
    }
}

TEST_CASE("canonical form is shared by a tuple and its reverse") {
    Rng rng(5);
    for (int i = 0; i < 2000; ++i) {
        FiveTuple t;
        t.src = IpAddress::v4(10, 0, 0, static_cast<std::uint8_t>(rng.below(4)));
        t.dst = IpAddress::v4(10, 0, 0, static_cast<std::uint8_t>(rng.below(4)));
        t.src_port = static_cast<std::uint16_t>(rng.below(3));
        t.dst_port = static_cast<std::uint16_t>(rng.below(3));
        t.protocol = 6;
        CHECK(t.canonical() == t.reversed().canonical());
        CHECK(t.canonical().canonical() == t.canonical());
        CHECK(FiveTupleHash{}(t.canonical()) == FiveTupleHash{}(t.reversed().canonical()));
    }
}

TEST_CASE("flow-label tables") {
    SUBCASE("empty") {
        std::istringstream in("Source IP,Source Port,Destination IP,Destination Port,Protocol,Label\n");
        const auto t = load_flow_labels(in);
        CHECK(t.entries.empty());
        CHECK(t.class_names.empty());
    }
    SUBCASE("bidirectional rows collapse") {
        std::istringstream in(
            "Flow ID, Source IP, Source Port, Destination IP, Destination Port, Protocol, Label\n"
            "x,10.0.0.1,1234,10.0.0.2,80,6,DoS\n"
            "y,10.0.0.2,80,10.0.0.1,1234,6,DoS\n");
        const auto t = load_flow_labels(in);
        CHECK(t.entries.size() == 1);
        CHECK(t.conflicts == 0);
        CHECK(t.class_names == std::vector<std::string>{"DoS"});
    }
    SUBCASE("first label wins") {
        std::istringstream in(
            "Source IP,Source Port,Destination IP,Destination Port,Protocol,Label\n"
            "10.0.0.1,1234,10.0.0.2,80,6,DoS\n"
            "10.0.0.2,80,10.0.0.1,1234,6,Benign\n"
            "10.0.0.9,1,10.0.0.2,80,17,\"Web Attack, XSS\"\n"
            "not-an-ip,1,10.0.0.2,80,6,DoS\n"
            "10.0.0.1,99999,10.0.0.2,80,6,DoS\n"
            "10.0.0.1,1\n");
        const auto t = load_flow_labels(in);
        CHECK(t.entries.size() == 2);
        CHECK(t.conflicts == 1);
        CHECK(t.row_errors == 3);
        CHECK(t.class_names == std::vector<std::string>{"DoS", "Web Attack, XSS"});

        PacketRecord r;
        r.tuple = {IpAddress::v4(10, 0, 0, 1), IpAddress::v4(10, 0, 0, 2), 1234, 80, 6};
        CHECK(label_packet(r, t)->class_id == 0);
        r.tuple = r.tuple.reversed();
        CHECK(label_packet(r, t)->class_id == 0);
        r.tuple.protocol = 17;
        CHECK(!label_packet(r, t).has_value());
    }
    SUBCASE("custom columns and delimiter") {
        std::istringstream in("a;b;c;d;e;lab\n10.0.0.1;1;10.0.0.2;2;6;X\n");
        ColumnMap m{"a", "b", "c", "d", "e", "lab", ';'};
        CHECK(load_flow_labels(in, m).entries.size() == 1);
        std::istringstream in2("a;b;c;d;e\n");
        CHECK(code_of([&] { load_flow_labels(in2, m); }) == ErrorCode::MissingColumn);
    }
}

namespace {

LabeledPacket pkt(std::uint16_t cls, Bytes payload) {
    LabeledPacket p;
    p.class_id = cls;
    p.record.payload = std::move(payload);
    return p;
}

} // namespace

TEST_CASE("prepare_dataset examples") {
    const std::vector<std::string> names = {"BENIGN", "DoS"};
    std::vector<LabeledPacket> three = {pkt(1, {1, 2}), pkt(1, {1, 2}), pkt(1, {1, 2})};
    CHECK(prepare_dataset(three, names, "BENIGN", 1.0, 0).size() == 1);

    std::vector<LabeledPacket> mixed;
    for (std::uint8_t i = 0; i < 100; ++i) mixed.push_back(pkt(0, {i}));
    for (std::uint8_t i = 0; i < 10; ++i) mixed.push_back(pkt(1, {i, i}));
    PrepareStats stats;
    const auto out = prepare_dataset(mixed, names, "BENIGN", 1.0, 3, &stats);
    CHECK(std::count_if(out.begin(), out.end(), [](auto& p) { return p.class_id == 0; }) == 10);
    CHECK(stats.benign_removed == 90);
    CHECK(std::is_sorted(out.begin(), out.end(), [](auto& a, auto& b) {
        return a.class_id == b.class_id && a.record.payload < b.record.payload;
    }));

    std::vector<LabeledPacket> empties = {pkt(1, {}), pkt(0, {}), pkt(1, {5})};
    const auto e = prepare_dataset(empties, names, "BENIGN", 1.0, 0);
    CHECK(e.size() == 1);

    // same payload under two classes is not a duplicate
    std::vector<LabeledPacket> twin = {pkt(0, {5}), pkt(1, {5})};
    CHECK(prepare_dataset(twin, names, "BENIGN", 1.0, 0).size() == 2);

    CHECK(code_of([&] { prepare_dataset(three, names, "Normal", 1.0, 0); }) == ErrorCode::UnknownBenignClass);
    CHECK(code_of([&] { prepare_dataset(three, names, "BENIGN", 0.0, 0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("split_dataset examples") {
    std::vector<LabeledPacket> ps;
    for (std::uint16_t i = 0; i < 1000; ++i) ps.push_back(pkt(i % 3, {static_cast<std::uint8_t>(i), static_cast<std::uint8_t>(i >> 8)}));
    const auto s = split_dataset(ps, 17);
    CHECK(s.d1.size() == 500);
    CHECK(s.d2.size() == 200);
    CHECK(s.d3.size() == 300);
    const auto again = split_dataset(ps, 17);
    for (std::size_t i = 0; i < 500; ++i) CHECK(s.d1[i].record.payload == again.d1[i].record.payload);

    ps.resize(10);
    const auto small = split_dataset(ps, 1);
    CHECK(small.d1.size() == 5);
    CHECK(small.d2.size() == 2);
    CHECK(small.d3.size() == 3);
    ps.resize(9);
    CHECK(code_of([&] { split_dataset(ps, 1); }) == ErrorCode::TooFewRecords);
}

TEST_CASE("manifest round trip") {
    std::vector<LabeledPacket> ps = {pkt(0, {0x00, 0xFF, 0x10}), pkt(3, {0xAB}), pkt(65535, {1, 2, 3, 4})};
    std::stringstream io;
    write_manifest(io, ps);
    CHECK(io.str().substr(0, 9) == "0,00ff10\n");
    const auto back = read_manifest(io);
    REQUIRE(back.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(back[i].class_id == ps[i].class_id);
        CHECK(back[i].payload == ps[i].record.payload);
    }
    for (const char* bad : {"1,abc\n", "x,00\n", "1;00\n", "70000,00\n", "1,zz\n"}) {
        std::istringstream in(bad);
        CHECK(code_of([&] { read_manifest(in); }) == ErrorCode::RowParseError);
    }
    CHECK(hex_decode("0aFF") == Bytes{0x0A, 0xFF});
}
