#include "bsid/capture/synth.hpp"

#include <fstream>

#include "bsid/capture/pcap.hpp"

namespace bsid::capture {

std::vector<std::string> synth_class_names(std::size_t classes) {
    std::vector<std::string> names{"BENIGN"};
    for (std::size_t i = 1; i < classes; ++i) {
        names.push_back("ATTACK_" + std::to_string(i));
    }
    return names;
}

std::vector<std::uint8_t> synth_payload(std::size_t class_id, const SynthConfig& config, Rng& rng) {
    const double noise = config.base_noise + config.noise_step * static_cast<double>(class_id);
    const std::size_t len = config.min_payload + rng.below(config.max_payload - config.min_payload + 1);
    std::vector<std::uint8_t> p(len);
    for (auto& b : p) {
        if (rng.uniform() < noise) {
            b = static_cast<std::uint8_t>(rng.below(256));
        } else {
            // triangular within the class band, so the in-band profile is not flat
            const auto offset = (rng.below(64) + rng.below(64)) / 2;
            b = static_cast<std::uint8_t>((64 * class_id + offset) & 0xFF);
        }
    }
    return p;
}

SynthSummary write_synthetic_corpus(const SynthConfig& config, const std::string& pcap_path,
                                    const std::string& labels_path) {
    if (config.classes < 2 || config.packets_per_flow == 0 || config.min_payload == 0 ||
        config.max_payload < config.min_payload) {
        throw Error(ErrorCode::InvalidArgument, "synthetic corpus settings out of range");
    }
    Rng rng(config.seed);
    const auto names = synth_class_names(config.classes);

    struct Flow {
        FiveTuple tuple;
        std::size_t class_id;  // == classes for unlabeled flows
        bool listed_reversed;
    };
    std::vector<Flow> flows;
    auto new_flow = [&](std::size_t cls) {
        Flow f;
        const auto n = static_cast<std::uint32_t>(flows.size());
        f.tuple.src = IpAddress::v4(10, static_cast<std::uint8_t>(cls), static_cast<std::uint8_t>(n >> 8),
                                    static_cast<std::uint8_t>(n));
        f.tuple.dst = IpAddress::v4(172, 16, static_cast<std::uint8_t>(rng.below(256)), 1);
        f.tuple.protocol = rng.below(4) == 0 ? kProtoUdp : kProtoTcp;
        f.tuple.src_port = static_cast<std::uint16_t>(1024 + rng.below(60000));
        f.tuple.dst_port = static_cast<std::uint16_t>(rng.below(2) == 0 ? 80 : 443);
        f.class_id = cls;
        f.listed_reversed = rng.below(2) == 0;
        flows.push_back(f);
        return flows.size() - 1;
    };

    struct Packet {
        std::size_t flow;
        bool empty;
    };
    std::vector<Packet> packets;
    for (std::size_t cls = 0; cls < config.classes; ++cls) {
        std::size_t flow = 0;
        for (std::size_t i = 0; i < config.packets_per_class; ++i) {
            if (i % config.packets_per_flow == 0) {
                flow = new_flow(cls);
            }
            packets.push_back({flow, false});
        }
    }
    const std::size_t labeled_flows = flows.size();
    for (std::size_t i = 0; i < config.empty_packets; ++i) {
        packets.push_back({rng.below(labeled_flows), true});
    }
    for (std::size_t i = 0; i < config.unlabeled_packets; ++i) {
        if (i % config.packets_per_flow == 0) {
            new_flow(config.classes);
        }
        packets.push_back({flows.size() - 1, false});
    }
    rng.shuffle(std::span<Packet>(packets));

    std::ofstream pcap(pcap_path, std::ios::binary);
    if (!pcap) {
        throw Error(ErrorCode::IoError, "cannot write " + pcap_path);
    }
    PcapWriter writer(pcap);
    const std::int64_t t0 = 1499000000;
    for (std::size_t i = 0; i < packets.size(); ++i) {
        const Flow& f = flows[packets[i].flow];
        // replies travel the other way; matching must be bidirectional
        const FiveTuple t = rng.below(3) == 0 ? f.tuple.reversed() : f.tuple;
        const std::size_t cls = std::min(f.class_id, config.classes - 1);
        const auto payload = packets[i].empty ? std::vector<std::uint8_t>{} : synth_payload(cls, config, rng);
        writer.write_packet({t0 + static_cast<std::int64_t>(i / 100), static_cast<std::uint32_t>(i % 100) * 10000000u},
                            t, payload);
    }
    if (!pcap) {
        throw Error(ErrorCode::IoError, "write failed: " + pcap_path);
    }

    std::ofstream csv(labels_path, std::ios::binary);
    if (!csv) {
        throw Error(ErrorCode::IoError, "cannot write " + labels_path);
    }
    csv << "Flow ID, Source IP, Source Port, Destination IP, Destination Port, Protocol, Label\n";
    for (std::size_t i = 0; i < labeled_flows; ++i) {
        const FiveTuple t = flows[i].listed_reversed ? flows[i].tuple.reversed() : flows[i].tuple;
        csv << i << ',' << t.src.to_string() << ',' << t.src_port << ',' << t.dst.to_string() << ',' << t.dst_port
            << ',' << int{t.protocol} << ',' << names[flows[i].class_id] << '\n';
    }
    if (!csv) {
        throw Error(ErrorCode::IoError, "write failed: " + labels_path);
    }
    return {packets.size(), flows.size()};
}

} // namespace bsid::capture
