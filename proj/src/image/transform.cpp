#include "bsid/image/transform.hpp"

#include <algorithm>

#include "bsid/error.hpp"
#include "bsid/simd/kernels.hpp"

namespace bsid::image {

ByteHistogram byte_histogram(std::span<const std::uint8_t> payload) {
    // Four interleaved tables break the store-to-load dependency on runs of
    // the same byte (zero padding, repeated fill).
    std::array<std::array<std::uint32_t, 256>, 4> part{};
    std::size_t i = 0;
    for (; i + 4 <= payload.size(); i += 4) {
        ++part[0][payload[i]];
        ++part[1][payload[i + 1]];
        ++part[2][payload[i + 2]];
        ++part[3][payload[i + 3]];
    }
    for (; i < payload.size(); ++i) {
        ++part[0][payload[i]];
    }
    ByteHistogram h{};
    for (std::size_t v = 0; v < 256; ++v) {
        h[v] = part[0][v] + part[1][v] + part[2][v] + part[3][v];
    }
    return h;
}

std::array<float, 256> normalize_histogram(const ByteHistogram& histogram) {
    std::array<float, 256> out{};
    const std::uint32_t peak = *std::max_element(histogram.begin(), histogram.end());
    if (peak == 0) {
        return out;
    }
    if (peak >= (1u << 31)) {
        throw Error(ErrorCode::InvalidArgument, "histogram count exceeds 2^31");
    }
    simd::active().normalize_counts(histogram.data(), out.data(), 256, peak);
    return out;
}

GrayscaleImage histogram_to_image(std::span<const float, 256> values) {
    GrayscaleImage img;
    for (std::size_t i = 0; i < kPixels; ++i) {
        if (!(values[i] >= 0.0f && values[i] <= 1.0f)) {
            throw Error(ErrorCode::InvalidArgument, "pixel value " + std::to_string(values[i]) + " outside [0, 1]");
        }
        img.pixels[i] = values[i];
    }
    return img;
}

GrayscaleImage transform_payload(std::span<const std::uint8_t> payload) {
    const auto normalized = normalize_histogram(byte_histogram(payload));
    return histogram_to_image(normalized);
}

} // namespace bsid::image
