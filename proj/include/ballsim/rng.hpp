#pragma once

#include <cstdint>

#include "ballsim/rational.hpp"

namespace ballsim {

inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// xoshiro256++ with explicit seeding so that streams are identical across
/// platforms and thread schedules. Each (seed, stream) pair yields an
/// independent sequence; repetition r of an experiment uses stream r.
class Rng {
public:
    explicit Rng(uint64_t seed, uint64_t stream = 0) {
        uint64_t sm = seed ^ (0x6a09e667f3bcc909ULL + stream * 0x3c6ef372fe94f82bULL);
        for (auto& word : s_) word = splitmix64(sm);
    }

    uint64_t next() {
        uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Unbiased uniform draw from [0, bound) (Lemire rejection method).
    uint64_t below(uint64_t bound) {
        unsigned __int128 m = static_cast<unsigned __int128>(next()) * bound;
        uint64_t lo = static_cast<uint64_t>(m);
        if (lo < bound) {
            uint64_t threshold = (0 - bound) % bound;
            while (lo < threshold) {
                m = static_cast<unsigned __int128>(next()) * bound;
                lo = static_cast<uint64_t>(m);
            }
        }
        return static_cast<uint64_t>(m >> 64);
    }

    /// Exact Bernoulli(p) for rational p in [0,1].
    bool bernoulli(const Rat& p) {
        uint64_t den = static_cast<uint64_t>(p.den());
        uint64_t num = static_cast<uint64_t>(p.num());
        return below(den) < num;
    }

private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    uint64_t s_[4];
};

}  // namespace ballsim
