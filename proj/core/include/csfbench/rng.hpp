#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace csfbench {

using Rng = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Independent stream per (seed, index, tag); generation order does not
/// matter, so per-window work can run in parallel.
constexpr std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index,
                                       std::uint64_t tag = 0) noexcept {
    return splitmix64(splitmix64(splitmix64(seed) ^ index) ^ (tag * 0xD1B54A32D192ED03ULL));
}

inline Rng make_rng(std::uint64_t seed, std::uint64_t index = 0, std::uint64_t tag = 0) {
    return Rng(substream_seed(seed, index, tag));
}

constexpr std::uint64_t fnv1a64(std::string_view bytes,
                                std::uint64_t h = 0xCBF29CE484222325ULL) noexcept {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

std::string to_hex(std::uint64_t value);

} // namespace csfbench
