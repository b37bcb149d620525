#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "bsid/util/random.hpp"

namespace bsid::capture {

/// Synthetic labelled traffic: class i draws most payload bytes from
/// [64 i, 64 i + 63] (modulo 256) and, with a class-specific probability,
/// a uniformly random byte instead. Class 0 is named "BENIGN".
struct SynthConfig {
    std::size_t classes = 4;
    std::size_t packets_per_class = 2000;
    std::size_t packets_per_flow = 20;
    std::size_t min_payload = 32;
    std::size_t max_payload = 512;
    double base_noise = 0.05;   // noise probability of class 0
    double noise_step = 0.05;   // added per class index
    std::size_t empty_packets = 40;      // payload-less ACKs, removed by preparation
    std::size_t unlabeled_packets = 40;  // packets on flows missing from the label table
    std::uint64_t seed = 0;
};

std::vector<std::string> synth_class_names(std::size_t classes);

std::vector<std::uint8_t> synth_payload(std::size_t class_id, const SynthConfig& config, Rng& rng);

struct SynthSummary {
    std::size_t frames = 0;
    std::size_t flows = 0;
};

/// Writes a capture and a CIC-style flow-label CSV describing it.
SynthSummary write_synthetic_corpus(const SynthConfig& config, const std::string& pcap_path,
                                    const std::string& labels_path);

} // namespace bsid::capture
