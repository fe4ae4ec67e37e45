#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace pconv {

/// 64-bit FNV-1a, used to turn stream labels into keys.
std::uint64_t hash_label(std::string_view label) noexcept;

/// SplitMix64 finalizer (a bijection on 64-bit words).
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Counter-based random stream.
///
/// Draw number `c` of the stream is a keyed bijective hash of `c`, so a stream
/// is fully described by (seed, label, counter). Rewinding the counter replays
/// the exact same draws, and streams with different labels are independent.
class RngStream {
public:
    RngStream() : RngStream(0, "default") {}
    RngStream(std::uint64_t seed, std::string_view label);

    std::uint64_t next_u64() noexcept;
    /// Uniform on [0, 1), 53-bit resolution.
    double uniform() noexcept;
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
    /// Standard normal via Box-Muller; consumes two draws.
    double normal() noexcept;
    /// Unbiased integer in [0, n). n must be positive.
    std::uint64_t below(std::uint64_t n) noexcept;

    /// Child stream whose label is "<label>/<sublabel>".
    RngStream split(std::string_view sublabel) const;

    std::uint64_t seed() const noexcept { return seed_; }
    const std::string& label() const noexcept { return label_; }
    std::uint64_t counter() const noexcept { return counter_; }
    void set_counter(std::uint64_t c) noexcept { counter_ = c; }

private:
    std::uint64_t seed_;
    std::string label_;
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace pconv
