#pragma once

// Checkpoint layout (all integers little-endian):
//
//   "BSNN" | version u8 | seed u64 | dropout counter u64
//   input rank u8 | dims u32...
//   node count u32 | per node: record length u32, then
//       kind u8 | name | units u32 | stride u32 | rate f32 | epsilon f32 |
//       momentum f32 | pinned u8 | input count u16 | inputs i32...
//   output node i32
//   parameter count u32 | per parameter:
//       name | role u8 | trainable u8 | rank u8 | dims u32... | values f32...
//   crc32 u32 over every preceding byte
//
// Strings are a u16 length followed by raw bytes.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bsid/nn/graph.hpp"

namespace bsid::nn {

inline constexpr std::uint8_t kCheckpointVersion = 1;

std::vector<std::uint8_t> save_checkpoint(const Graph& graph);

/// Throws VersionMismatch for an unknown version byte and ChecksumMismatch for
/// a bad magic, a truncated stream, or a body that fails its CRC.
Graph load_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint_file(const Graph& graph, const std::string& path);
Graph load_checkpoint_file(const std::string& path);

} // namespace bsid::nn
