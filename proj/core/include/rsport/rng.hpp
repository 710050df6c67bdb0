#pragma once

#include <cstdint>
#include <random>

namespace rsport {

/// SplitMix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t mix_seed(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Generator for stream `index` under a run seed. Depends only on the pair,
/// so results do not depend on how work is split across threads.
inline std::mt19937_64 stream_engine(std::uint64_t seed, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(mix_seed(index)),
                      static_cast<std::uint32_t>(mix_seed(index) >> 32)};
    return std::mt19937_64(seq);
}

}  // namespace rsport
