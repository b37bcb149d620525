#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>

namespace bsid {

/// Flat key=value settings. Blank lines and lines starting with '#' are
/// ignored; whitespace around keys and values is trimmed.
class Config {
public:
    Config() = default;

    /// IoError when the file cannot be read; InvalidArgument on a line
    /// without '=' or a repeated key.
    static Config load(const std::string& path);
    static Config parse(std::string_view text);

    bool has(const std::string& key) const { return values_.contains(key); }
    void set(const std::string& key, std::string value) { values_[key] = std::move(value); }

    // InvalidArgument when the value does not parse.
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;

    /// InvalidArgument naming the first key not in `known`.
    void require_known(std::span<const std::string_view> known) const;

private:
    std::map<std::string, std::string, std::less<>> values_;
};

} // namespace bsid
