#include "bsid/image/dataset.hpp"

#include <cstring>

#include "bsid/util/binary_io.hpp"

namespace bsid::image {

void ImageDataset::push_back(const GrayscaleImage& img, std::uint16_t label) {
    labels.push_back(label);
    pixels.insert(pixels.end(), img.pixels.begin(), img.pixels.end());
}

nn::Tensor ImageDataset::tensor() const { return nn::Tensor({size(), kSide, kSide, 1}, pixels); }

ImageDataset transform_manifest(std::span<const capture::ManifestRecord> records, std::uint16_t class_count) {
    ImageDataset out;
    out.class_count = class_count;
    out.labels.reserve(records.size());
    out.pixels.reserve(records.size() * kPixels);
    for (const auto& r : records) {
        if (r.class_id >= class_count) {
            throw Error(ErrorCode::ClassOutOfRange, "class id " + std::to_string(r.class_id) + " but only " +
                                                        std::to_string(class_count) + " classes");
        }
        out.push_back(transform_payload(r.payload), r.class_id);
    }
    return out;
}

std::vector<std::uint8_t> encode_dataset(const ImageDataset& data) {
    ByteWriter w;
    w.put_bytes({reinterpret_cast<const std::uint8_t*>("BSID"), 4});
    w.put(kDatasetVersion);
    w.put(static_cast<std::uint32_t>(data.size()));
    w.put(data.class_count);
    for (std::size_t i = 0; i < data.size(); ++i) {
        w.put(data.labels[i]);
        for (float v : data.image(i)) {
            w.put(v);
        }
    }
    return w.take();
}

ImageDataset decode_dataset(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 5 || std::memcmp(bytes.data(), "BSID", 4) != 0) {
        throw Error(ErrorCode::MalformedHeader, "not an image dataset");
    }
    if (bytes[4] != kDatasetVersion) {
        throw Error(ErrorCode::VersionMismatch, "image dataset version " + std::to_string(bytes[4]));
    }
    ByteReader r(bytes.subspan(5), ErrorCode::MalformedHeader);
    const auto count = r.get<std::uint32_t>();
    ImageDataset out;
    out.class_count = r.get<std::uint16_t>();
    const std::size_t record_bytes = 2 + 4 * kPixels;
    if (r.remaining() != std::size_t{count} * record_bytes) {
        throw Error(ErrorCode::MalformedHeader, "image dataset declares " + std::to_string(count) +
                                                    " records but holds " + std::to_string(r.remaining()) + " bytes");
    }
    out.labels.resize(count);
    out.pixels.resize(std::size_t{count} * kPixels);
    for (std::size_t i = 0; i < count; ++i) {
        out.labels[i] = r.get<std::uint16_t>();
        if (out.labels[i] >= out.class_count) {
            throw Error(ErrorCode::ClassOutOfRange, "record " + std::to_string(i) + " has class " +
                                                        std::to_string(out.labels[i]));
        }
        for (std::size_t p = 0; p < kPixels; ++p) {
            out.pixels[i * kPixels + p] = r.get<float>();
        }
    }
    return out;
}

void write_dataset_file(const std::string& path, const ImageDataset& data) { write_file(path, encode_dataset(data)); }

ImageDataset read_dataset_file(const std::string& path) { return decode_dataset(read_file(path)); }

} // namespace bsid::image
