#pragma once

#include <cstdint>

namespace spider {

/// SplitMix64 output function; also used as a 64-bit mixer.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

inline std::uint64_t mix64(std::uint64_t z) { return splitmix64(z); }

/// xoshiro256++ with per-stream seeding: the state is a pure function of
/// (seed, stream), so substreams are reproducible and order-independent
/// across workers.
class Xoshiro256pp {
public:
    Xoshiro256pp(std::uint64_t seed, std::uint64_t stream) {
        std::uint64_t sm = mix64(seed) ^ mix64(stream * 0xD1342543DE82EF95ull + 0x63652362B137BCCAull);
        bool nonzero = false;
        for (auto& w : s_) {
            w = splitmix64(sm);
            nonzero |= (w != 0);
        }
        if (!nonzero) s_[0] = 1;
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t s_[4];
};

} // namespace spider
