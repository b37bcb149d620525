#pragma once

// Image dataset file, little-endian:
//   "BSID" | version u8 | record count u32 | class count u16 |
//   per record: class id u16 | 256 x f32 pixels in byte-value order

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bsid/capture/dataset.hpp"
#include "bsid/image/transform.hpp"
#include "bsid/nn/tensor.hpp"

namespace bsid::image {

inline constexpr std::uint8_t kDatasetVersion = 1;

struct ImageDataset {
    std::uint16_t class_count = 0;
    std::vector<std::uint16_t> labels;
    std::vector<float> pixels;  // labels.size() * kPixels

    std::size_t size() const { return labels.size(); }
    std::span<const float> image(std::size_t i) const { return {pixels.data() + i * kPixels, kPixels}; }

    void push_back(const GrayscaleImage& img, std::uint16_t label);

    /// [count, 16, 16, 1] network input.
    nn::Tensor tensor() const;

    bool operator==(const ImageDataset&) const = default;
};

/// Transforms every manifest record. ClassOutOfRange when a class id is not
/// below class_count.
ImageDataset transform_manifest(std::span<const capture::ManifestRecord> records, std::uint16_t class_count);

std::vector<std::uint8_t> encode_dataset(const ImageDataset& data);
/// MalformedHeader on a bad magic or a short/overlong body, VersionMismatch on
/// an unknown version, ClassOutOfRange on a label outside the class count.
ImageDataset decode_dataset(std::span<const std::uint8_t> bytes);

void write_dataset_file(const std::string& path, const ImageDataset& data);
ImageDataset read_dataset_file(const std::string& path);

} // namespace bsid::image
