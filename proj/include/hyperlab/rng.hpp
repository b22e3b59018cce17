// rng.hpp — deterministic, platform-independent random numbers.
//
// std::uniform_real_distribution is implementation-defined, which would break
// the bit-for-bit reproducibility contract of the experiment reports, so the
// generator and the double conversion are spelled out here (splitmix64 for
// seeding, xoshiro256** for the stream).  Worker k of a sweep draws from
// derive(seed, k), making results independent of the worker count.

#pragma once

#include <cstdint>

namespace hyperlab {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

class Rng {
  public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64(sm);
    }

    // independent stream for a sweep item; XOR-folding the index through
    // splitmix keeps streams decorrelated for adjacent indices
    static Rng derive(std::uint64_t seed, std::uint64_t index) {
        std::uint64_t sm = index + 0x632BE59BD9B4E019ULL;
        return Rng(seed ^ splitmix64(sm));
    }

    std::uint64_t next_u64() {
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

    // uniform in [0,1) with 53 random bits
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    std::uint64_t uniform_index(std::uint64_t n) { return next_u64() % n; }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t s_[4];
};

}  // namespace hyperlab
