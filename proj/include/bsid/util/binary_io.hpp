#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "bsid/error.hpp"

namespace bsid {

/// Little-endian byte sink used by every binary format in the project.
class ByteWriter {
public:
    template <typename T>
        requires std::is_arithmetic_v<T>
    void put(T value) {
        if constexpr (std::is_floating_point_v<T>) {
            using Bits = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
            put(std::bit_cast<Bits>(value));
        } else {
            using U = std::make_unsigned_t<T>;
            auto bits = static_cast<U>(value);
            for (std::size_t i = 0; i < sizeof(T); ++i) {
                bytes_.push_back(static_cast<std::uint8_t>(bits & 0xFF));
                if constexpr (sizeof(T) > 1) {
                    bits = static_cast<U>(bits >> 8);
                }
            }
        }
    }

    void put_bytes(std::span<const std::uint8_t> data) { bytes_.insert(bytes_.end(), data.begin(), data.end()); }

    void put_string(std::string_view s) {
        put(static_cast<std::uint16_t>(s.size()));
        bytes_.insert(bytes_.end(), s.begin(), s.end());
    }

    std::size_t size() const { return bytes_.size(); }
    const std::vector<std::uint8_t>& bytes() const { return bytes_; }
    std::vector<std::uint8_t> take() { return std::move(bytes_); }

private:
    std::vector<std::uint8_t> bytes_;
};

/// Bounds-checked little-endian reader over a byte span. Running past the end
/// raises the error code supplied at construction.
class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> data, ErrorCode on_underflow = ErrorCode::ChecksumMismatch)
        : data_(data), on_underflow_(on_underflow) {}

    template <typename T>
        requires std::is_arithmetic_v<T>
    T get() {
        if constexpr (std::is_floating_point_v<T>) {
            using Bits = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
            return std::bit_cast<T>(get<Bits>());
        } else {
            require(sizeof(T));
            using U = std::make_unsigned_t<T>;
            U bits = 0;
            for (std::size_t i = 0; i < sizeof(T); ++i) {
                bits = static_cast<U>(bits | (static_cast<U>(data_[pos_ + i]) << (8 * i)));
            }
            pos_ += sizeof(T);
            return static_cast<T>(bits);
        }
    }

    std::span<const std::uint8_t> get_bytes(std::size_t n) {
        require(n);
        auto out = data_.subspan(pos_, n);
        pos_ += n;
        return out;
    }

    std::string get_string() {
        const auto n = get<std::uint16_t>();
        auto raw = get_bytes(n);
        return {reinterpret_cast<const char*>(raw.data()), raw.size()};
    }

    std::size_t position() const { return pos_; }
    std::size_t remaining() const { return data_.size() - pos_; }

private:
    void require(std::size_t n) const {
        if (n > data_.size() - pos_) {
            throw Error(on_underflow_, "unexpected end of data");
        }
    }

    std::span<const std::uint8_t> data_;
    std::size_t pos_ = 0;
    ErrorCode on_underflow_;
};

std::uint32_t crc32(std::span<const std::uint8_t> data);

std::vector<std::uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, std::span<const std::uint8_t> data);

} // namespace bsid
