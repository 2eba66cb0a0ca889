// SPDX-License-Identifier: Apache-2.0
//
// Seeded randomness helpers. std::mt19937_64 has a fully specified output
// sequence, but the standard *distributions* do not, so every draw that can
// end up in a frozen test expectation or an exported file goes through the
// portable mappings below.
#ifndef PROMPT_ELITES_RANDOM_HPP
#define PROMPT_ELITES_RANDOM_HPP

#include <cstdint>
#include <initializer_list>
#include <random>

namespace prompt_elites {

/// splitmix64 step (Steele/Lea/Flood); used for seed derivation and stateless
/// hashing so that per-individual streams never depend on scheduling order.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Collapses an arbitrary list of 64-bit parts into one derived seed.
inline std::uint64_t mix_seed(std::initializer_list<std::uint64_t> parts) {
    std::uint64_t state = 0x8fb3c9a569d2f1b7ULL;
    for (std::uint64_t p : parts) {
        state ^= splitmix64(state) ^ p;
        (void)splitmix64(state);
    }
    return splitmix64(state);
}

/// FNV-1a over a string, for deriving stream tags from names.
inline std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Stateless hash of 64-bit parts into [0, 1). Deterministic across platforms.
inline double hash01(std::initializer_list<std::uint64_t> parts) {
    std::uint64_t x = mix_seed(parts);
    return static_cast<double>(x >> 11) * 0x1.0p-53;
}

/// Seeded RNG wrapping std::mt19937_64 with portable distribution mappings.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform index in [0, n) via rejection sampling (unbiased, portable).
    std::size_t uniform_index(std::size_t n) {
        if (n <= 1) return 0;
        const std::uint64_t bound = n;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return static_cast<std::size_t>(x % bound);
    }

    bool bernoulli(double p) {
        if (p <= 0.0) return false;
        if (p >= 1.0) return true;
        return uniform01() < p;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace prompt_elites

#endif
