#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>

namespace mineco {

/// SplitMix64 finalizer. Also used to derive sub-seeds.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Derives an independent stream key from a master seed and a fixed offset.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t offset) noexcept {
    return mix64(mix64(master) ^ mix64(offset + 0x632BE59BD9B4E019ULL));
}

constexpr std::uint64_t mul_high(std::uint64_t a, std::uint64_t b) noexcept {
    const std::uint64_t a_lo = a & 0xFFFFFFFFu, a_hi = a >> 32;
    const std::uint64_t b_lo = b & 0xFFFFFFFFu, b_hi = b >> 32;
    const std::uint64_t lo_lo = a_lo * b_lo;
    const std::uint64_t hi_lo = a_hi * b_lo;
    const std::uint64_t lo_hi = a_lo * b_hi;
    const std::uint64_t cross = (lo_lo >> 32) + (hi_lo & 0xFFFFFFFFu) + lo_hi;
    return a_hi * b_hi + (hi_lo >> 32) + (cross >> 32);
}

/// Counter-based generator: the i-th draw is mix64(key + (i+1)·golden).
///
/// The output sequence is a pure function of (key, counter), which makes test
/// vectors trivial to reproduce in any language with 64-bit unsigned wraparound.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed = 0) noexcept : key_(seed) {}

    std::uint64_t next_u64() noexcept {
        ++counter_;
        return mix64(key_ + counter_ * 0x9E3779B97F4A7C15ULL);
    }

    /// Uniform on (0, 1]; never returns 0 so it is safe under log().
    double uniform_open() noexcept {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    /// Uniform on [0, 1).
    double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform integer on [0, n): high word of the 128-bit product draw * n.
    std::uint64_t below(std::uint64_t n) noexcept { return mul_high(next_u64(), n); }

    /// Two independent standard normals from one Box-Muller transform.
    std::pair<double, double> normal_pair() noexcept {
        const double u1 = uniform_open();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 2.0 * std::numbers::pi * u2;
        return {r * std::cos(t), r * std::sin(t)};
    }

    /// One standard normal. Discards the second Box-Muller output.
    double normal() noexcept { return normal_pair().first; }

    std::uint64_t key() const noexcept { return key_; }
    std::uint64_t counter() const noexcept { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace mineco
