#pragma once

#include <array>
#include <cstdint>

namespace bt::stat {

// SplitMix64 finalizer. Used for seeding and for deriving sub-stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t& state) noexcept {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Seeded xoshiro256** generator (period 2^256 - 1).
///
/// The four state words are filled from SplitMix64 applied to the seed, which
/// is the seeding procedure recommended by the generator's authors. Every
/// operation is plain 64-bit integer arithmetic, so a given seed produces the
/// same sequence on every platform.
///
/// Sub-streams for replica `i` are seeded with `derive_seed(seed, i)`, a pure
/// function of the pair.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) noexcept;

    std::uint64_t seed() const noexcept { return seed_; }

    std::uint64_t next_u64() noexcept {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double next_unit() noexcept {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform double in (0, 1]; safe as a log() argument.
    double next_open_unit() noexcept {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    /// Independent stream for replica `index`, derived from this stream's seed.
    RandomStream substream(std::uint64_t index) const noexcept;

    static std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept;

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t seed_;
    std::array<std::uint64_t, 4> s_{};
};

}  // namespace bt::stat
