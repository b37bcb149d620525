#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace bsid::image {

inline constexpr std::size_t kSide = 16;
inline constexpr std::size_t kPixels = kSide * kSide;

using ByteHistogram = std::array<std::uint32_t, 256>;

/// 16x16 grid, row-major: pixel(row, col) holds byte value 16 * row + col.
struct GrayscaleImage {
    std::array<float, kPixels> pixels{};

    float at(std::size_t row, std::size_t col) const { return pixels[row * kSide + col]; }
    bool operator==(const GrayscaleImage&) const = default;
};

/// Counts of each byte value over the payload itself (no padding).
ByteHistogram byte_histogram(std::span<const std::uint8_t> payload);

/// counts / max(counts); all zeros for an empty histogram.
std::array<float, 256> normalize_histogram(const ByteHistogram& histogram);

/// InvalidArgument if a value is outside [0, 1] or NaN.
GrayscaleImage histogram_to_image(std::span<const float, 256> values);

GrayscaleImage transform_payload(std::span<const std::uint8_t> payload);

} // namespace bsid::image
