#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

// Deterministic random streams. xoshiro256++ seeded through splitmix64, with
// explicit uniform/normal/int draws so results are identical across standard
// libraries. Substreams are derived from (seed, tag) pairs, never by sharing
// generator state.

namespace igsyn {

constexpr std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// FNV-1a, for turning stream labels into derivation tags.
constexpr std::uint64_t tag_hash(std::string_view label) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : label) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Child seed for a named substream; further indexed substreams pass idx.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag,
                                    std::uint64_t idx = 0) {
    std::uint64_t s = base ^ (tag * 0x2545f4914f6cdd1dULL) ^ (idx + 0x9e3779b97f4a7c15ULL);
    splitmix64(s);
    return splitmix64(s);
}

constexpr std::uint64_t derive_seed(std::uint64_t base, std::string_view label,
                                    std::uint64_t idx = 0) {
    return derive_seed(base, tag_hash(label), idx);
}

class RngStream {
public:
    explicit RngStream(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = splitmix64(sm);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n). n must be >= 1.
    std::uint64_t uniform_int(std::uint64_t n) {
        const std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            std::uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    // Standard normal via Box-Muller (second deviate discarded).
    double normal() {
        const double u1 = 1.0 - uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4];
};

}  // namespace igsyn
