#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <variant>

#include "pconv/tensor.hpp"

namespace pconv {

/// Self-describing binary container of named tensors, counters and text.
///
/// Layout (little-endian): magic "PCONVCKP", u32 format version, u64 entry
/// count, then per entry u8 kind, u32 key length, key bytes and a payload;
/// a trailing u64 FNV-1a checksum covers every preceding byte. Tensors are
/// stored as u32 rank, u64 extents and raw IEEE-754 doubles, so a round trip
/// is bit-exact.
class Archive {
public:
    static constexpr std::uint32_t kFormatVersion = 1;

    void put(const std::string& key, Tensor value) { entries_[key] = std::move(value); }
    void put(const std::string& key, std::uint64_t value) { entries_[key] = value; }
    void put(const std::string& key, double value) { entries_[key] = value; }
    void put(const std::string& key, std::string value) { entries_[key] = std::move(value); }

    bool has(const std::string& key) const { return entries_.contains(key); }
    const Tensor& tensor(const std::string& key) const;
    std::uint64_t u64(const std::string& key) const;
    double f64(const std::string& key) const;
    const std::string& text(const std::string& key) const;

    /// Keys with the given prefix, in sorted order.
    std::vector<std::string> keys(const std::string& prefix = "") const;

    void save(const std::filesystem::path& path) const;
    /// Throws IoError on unreadable, truncated, corrupt or version-mismatched files.
    static Archive load(const std::filesystem::path& path);

    friend bool operator==(const Archive&, const Archive&) = default;

private:
    using Entry = std::variant<Tensor, std::uint64_t, double, std::string>;
    template <class T>
    const T& get(const std::string& key) const;

    std::map<std::string, Entry> entries_;
};

}  // namespace pconv
