#pragma once
#include <cstdint>
#include <initializer_list>
#include <random>

namespace levym {

// Counter-based stream derivation: every consumer mixes (master seed, purpose
// channel, indices...) into an independent engine.  Results are therefore
// invariant under execution order and thread count.
namespace rngchan {
inline constexpr std::uint64_t jumps = 0x4a554d5053ull;
inline constexpr std::uint64_t brownian = 0x42524f574eull;
inline constexpr std::uint64_t bridge = 0x4252494447ull;
inline constexpr std::uint64_t inner = 0x494e4e4552ull;
inline constexpr std::uint64_t pilot = 0x50494c4f54ull;
}  // namespace rngchan

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Mixes all words through a splitmix64 chain and seeds a mt19937_64.
inline std::mt19937_64 derive_rng(std::uint64_t master, std::initializer_list<std::uint64_t> words) {
    std::uint64_t s = master ^ 0x6c657679756d3031ull;
    std::uint64_t acc = splitmix64(s);
    for (std::uint64_t w : words) {
        s ^= w + 0x9e3779b97f4a7c15ull + (acc << 6) + (acc >> 2);
        acc = splitmix64(s);
    }
    std::seed_seq seq{static_cast<std::uint32_t>(acc), static_cast<std::uint32_t>(acc >> 32),
                      static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32)};
    return std::mt19937_64(seq);
}

}  // namespace levym
