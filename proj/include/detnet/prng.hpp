#pragma once

#include <cstdint>

namespace detnet {

/// SplitMix64 (Steele, Lea & Flood).  Output i of a stream is a pure
/// function of (seed, i), so streams split by index reproduce exactly on any
/// platform.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30U)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27U)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31U);
    }

    std::uint64_t next() {
        state_ += kGamma;
        return mix(state_);
    }

    /// Independent child stream number `index`.
    SplitMix64 split(std::uint64_t index) const { return SplitMix64(mix(state_ ^ mix(index + kGamma))); }

    /// Uniform in [0, bound); bound > 0.  Rejection sampling, no modulo bias.
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t x = next();
        while (x >= limit) x = next();
        return x % bound;
    }

    /// Uniform in [0, 1) with 53 random bits.
    double unit() { return static_cast<double>(next() >> 11U) * 0x1.0p-53; }

    bool bit() { return (next() >> 63U) != 0; }

private:
    static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
    std::uint64_t state_;
};

}  // namespace detnet
