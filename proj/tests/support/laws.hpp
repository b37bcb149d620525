#pragma once

// Randomized dataset laws shared by the unit tests and the acceptance binary.
// Each law runs `cases` independent random instances and reports the first
// counterexample it finds.

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "bsid/capture/dataset.hpp"
#include "bsid/capture/flow_labels.hpp"
#include "bsid/image/dataset.hpp"
#include "bsid/model/base_learner.hpp"
#include "bsid/util/random.hpp"

namespace bsid::testing {

struct LawResult {
    std::size_t cases = 0;
    std::size_t failures = 0;
    std::string first_failure;

    bool ok() const { return cases > 0 && failures == 0; }

    void fail(std::size_t c, const std::string& why) {
        if (failures++ == 0) {
            first_failure = "case " + std::to_string(c) + ": " + why;
        }
    }
};

inline bsid::capture::LabeledPacket tagged_packet(std::uint32_t tag, std::uint16_t cls) {
    bsid::capture::LabeledPacket p;
    p.record.payload = {static_cast<std::uint8_t>(tag), static_cast<std::uint8_t>(tag >> 8),
                        static_cast<std::uint8_t>(tag >> 16), 0x5A};
    p.class_id = cls;
    return p;
}

inline std::uint32_t tag_of(const bsid::capture::LabeledPacket& p) {
    return p.record.payload[0] | (p.record.payload[1] << 8) | (p.record.payload[2] << 16);
}

/// Part sizes are floor(n/2), floor(n/5) and the rest, and the parts
/// together are a permutation of the input.
inline LawResult split_floor_law(std::size_t cases, std::uint64_t seed) {
    LawResult r;
    bsid::Rng rng(seed);
    for (std::size_t c = 0; c < cases; ++c, ++r.cases) {
        const std::size_t n = 10 + rng.below(c % 10 == 0 ? 5000 : 400);
        std::vector<bsid::capture::LabeledPacket> packets;
        for (std::size_t i = 0; i < n; ++i) {
            packets.push_back(tagged_packet(static_cast<std::uint32_t>(i), 0));
        }
        const auto split = bsid::capture::split_dataset(std::move(packets), rng.next());
        if (split.d1.size() != n / 2 || split.d2.size() != n / 5 || split.d3.size() != n - n / 2 - n / 5) {
            r.fail(c, "n=" + std::to_string(n) + " gave " + std::to_string(split.d1.size()) + "/" +
                          std::to_string(split.d2.size()) + "/" + std::to_string(split.d3.size()));
            continue;
        }
        std::vector<char> seen(n, 0);
        bool ok = true;
        for (const auto* part : {&split.d1, &split.d2, &split.d3}) {
            for (const auto& p : *part) {
                const auto t = tag_of(p);
                ok = ok && t < n && !seen[t];
                if (t < n) {
                    seen[t] = 1;
                }
            }
        }
        if (!ok) {
            r.fail(c, "parts are not a permutation of the input (n=" + std::to_string(n) + ")");
        }
    }
    return r;
}

/// prepare(prepare(x)) == prepare(x); the result has no empty payloads, no
/// repeated (payload, class) pair, and at most floor(ratio * non-benign)
/// benign records.
inline LawResult dedup_idempotence_law(std::size_t cases, std::uint64_t seed) {
    LawResult r;
    bsid::Rng rng(seed);
    const std::vector<std::string> names{"BENIGN", "A", "B", "C"};
    for (std::size_t c = 0; c < cases; ++c, ++r.cases) {
        const std::size_t n = rng.below(200);
        const std::size_t distinct = 1 + rng.below(40);  // small pool forces duplicates
        std::vector<bsid::capture::LabeledPacket> packets;
        for (std::size_t i = 0; i < n; ++i) {
            bsid::capture::LabeledPacket p;
            const auto v = rng.below(distinct);
            p.record.payload.assign(v % 7, static_cast<std::uint8_t>(v));  // v % 7 == 0 gives empty payloads
            p.class_id = static_cast<std::uint16_t>(rng.below(names.size()));
            packets.push_back(std::move(p));
        }
        const double ratio = 0.25 + rng.uniform() * 2.0;
        const std::uint64_t s = rng.next();
        const auto once = bsid::capture::prepare_dataset(packets, names, "BENIGN", ratio, s);
        const auto twice = bsid::capture::prepare_dataset(once, names, "BENIGN", ratio, s);
        auto same = [](const auto& a, const auto& b) {
            return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](const auto& x, const auto& y) {
                       return x.class_id == y.class_id && x.record.payload == y.record.payload;
                   });
        };
        if (!same(once, twice)) {
            r.fail(c, "second pass changed " + std::to_string(once.size()) + " records to " +
                          std::to_string(twice.size()));
            continue;
        }
        std::set<std::pair<std::uint16_t, std::vector<std::uint8_t>>> keys;
        std::size_t benign = 0;
        bool ok = true;
        for (const auto& p : once) {
            ok = ok && !p.record.payload.empty() && keys.emplace(p.class_id, p.record.payload).second;
            benign += p.class_id == 0 ? 1 : 0;
        }
        const auto cap = static_cast<std::size_t>(ratio * static_cast<double>(once.size() - benign));
        if (!ok || benign > cap) {
            r.fail(c, "empty, duplicate or uncapped benign records survived");
        }
    }
    return r;
}

/// Across the N one-vs-all views of a dataset every record is positive in
/// exactly one view, and each view's positive count matches its class count.
inline LawResult one_vs_all_partition_law(std::size_t cases, std::uint64_t seed) {
    LawResult r;
    bsid::Rng rng(seed);
    for (std::size_t c = 0; c < cases; ++c, ++r.cases) {
        bsid::image::ImageDataset data;
        data.class_count = static_cast<std::uint16_t>(2 + rng.below(14));
        const std::size_t n = 1 + rng.below(40);
        std::vector<std::size_t> per_class(data.class_count, 0);
        for (std::size_t i = 0; i < n; ++i) {
            bsid::image::GrayscaleImage img;
            img.pixels[rng.below(bsid::image::kPixels)] = 1.0f;
            const auto label = static_cast<std::uint16_t>(rng.below(data.class_count));
            ++per_class[label];
            data.push_back(img, label);
        }
        std::vector<int> hits(n, 0);
        bool counts_ok = true;
        for (std::uint16_t k = 0; k < data.class_count; ++k) {
            const auto view = bsid::model::to_one_vs_all(data, k);
            counts_ok = counts_ok && view.positives == per_class[k];
            for (std::size_t i = 0; i < n; ++i) {
                hits[i] += view.targets[i] == 1.0f ? 1 : 0;
                counts_ok = counts_ok && (view.targets[i] == 0.0f || view.targets[i] == 1.0f);
            }
        }
        if (!counts_ok || std::any_of(hits.begin(), hits.end(), [](int h) { return h != 1; })) {
            r.fail(c, "records not partitioned across " + std::to_string(data.class_count) + " views");
        }
    }
    return r;
}

inline bsid::capture::FiveTuple random_tuple(bsid::Rng& rng) {
    bsid::capture::FiveTuple t;
    const bool v6 = rng.below(4) == 0;
    for (auto* ip : {&t.src, &t.dst}) {
        ip->family = v6 ? 6 : 4;
        for (std::size_t i = 0; i < (v6 ? 16u : 4u); ++i) {
            ip->bytes[i] = static_cast<std::uint8_t>(rng.below(256));
        }
    }
    if (rng.below(8) == 0) {
        t.dst = t.src;  // same host on both ends: ports alone order the endpoints
    }
    const std::uint8_t protos[] = {bsid::capture::kProtoTcp, bsid::capture::kProtoUdp, bsid::capture::kProtoIcmp};
    t.protocol = protos[rng.below(3)];
    if (t.protocol != bsid::capture::kProtoIcmp) {
        t.src_port = static_cast<std::uint16_t>(rng.below(65536));
        t.dst_port = static_cast<std::uint16_t>(rng.below(65536));
    }
    return t;
}

/// A flow listed in either direction labels packets travelling both ways
/// with its label; tuples absent from the table stay unmatched.
inline LawResult bidirectional_matching_law(std::size_t cases, std::uint64_t seed) {
    LawResult r;
    bsid::Rng rng(seed);
    const std::vector<std::string> labels{"BENIGN", "DoS Hulk", "PortScan", "Bot"};
    for (std::size_t c = 0; c < cases; ++c, ++r.cases) {
        std::map<bsid::capture::FiveTuple, std::string> expected;  // by canonical tuple
        std::vector<bsid::capture::FiveTuple> flows;
        std::ostringstream csv;
        csv << "Flow ID, Source IP, Source Port, Destination IP, Destination Port, Protocol, Label\n";
        const std::size_t rows = 1 + rng.below(20);
        for (std::size_t i = 0; i < rows; ++i) {
            const auto t = random_tuple(rng);
            if (!expected.emplace(t.canonical(), labels[rng.below(labels.size())]).second) {
                continue;
            }
            flows.push_back(t);
            const auto listed = rng.below(2) == 0 ? t : t.reversed();
            csv << i << ',' << listed.src.to_string() << ',' << listed.src_port << ',' << listed.dst.to_string() << ','
                << listed.dst_port << ',' << int{listed.protocol} << ',' << expected[t.canonical()] << '\n';
        }
        std::istringstream in(csv.str());
        const auto table = bsid::capture::load_flow_labels(in);

        bool ok = true;
        std::string why;
        for (const auto& t : flows) {
            for (const auto& dir : {t, t.reversed()}) {
                bsid::capture::PacketRecord rec;
                rec.tuple = dir;
                const auto hit = bsid::capture::label_packet(rec, table);
                if (!hit || table.class_names.at(hit->class_id) != expected[t.canonical()]) {
                    ok = false;
                    why = dir.to_string() + " not labelled " + expected[t.canonical()];
                }
            }
        }
        const auto stranger = random_tuple(rng);
        if (!expected.contains(stranger.canonical())) {
            bsid::capture::PacketRecord rec;
            rec.tuple = stranger;
            if (bsid::capture::label_packet(rec, table)) {
                ok = false;
                why = "unlisted " + stranger.to_string() + " matched";
            }
        }
        if (!ok) {
            r.fail(c, why);
        }
    }
    return r;
}

} // namespace bsid::testing
