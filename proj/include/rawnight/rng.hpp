#pragma once

#include <cstdint>
#include <string_view>

namespace rawnight::rng {

// SplitMix64 finalizer; a bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Order-sensitive combination of two 64-bit keys.
constexpr std::uint64_t combine(std::uint64_t a, std::uint64_t b) noexcept {
    return mix64(a ^ (mix64(b) + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2)));
}

// FNV-1a, used to fold identifiers (image ids, instance ids) into seeds.
constexpr std::uint64_t hash_string(std::string_view text) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t hash_double(double value) noexcept;

/**
 * Counter-based random stream.
 *
 * A stream is fully determined by its key; draw i is mix64(key + i * phi).
 * Pixel kernels build one stream per (seed, pixel index) so results do not
 * depend on how pixels are distributed across threads.
 */
class Stream {
public:
    explicit constexpr Stream(std::uint64_t key) noexcept : key_(mix64(key)) {}
    constexpr Stream(std::uint64_t seed, std::uint64_t index) noexcept
        : key_(combine(seed, index)) {}

    constexpr std::uint64_t next_u64() noexcept {
        counter_ += 0x9e3779b97f4a7c15ULL;
        return mix64(key_ + counter_);
    }

    // Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform on (0, 1], safe for log().
    double uniform_open0() noexcept {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    // Standard normal deviate (Box-Muller, cosine branch).
    double normal() noexcept;

    // Exact Binomial(n, p) draw. Inversion for small n*min(p,1-p), BTRD otherwise.
    std::int64_t binomial(std::int64_t n, double p) noexcept;

    // Exact Poisson(lambda) draw. Multiplication method for small lambda, PTRS otherwise.
    std::int64_t poisson(double lambda) noexcept;

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace rawnight::rng
