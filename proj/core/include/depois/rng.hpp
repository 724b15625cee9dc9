#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace depois {

// 64-bit FNV-1a. Used for seed derivation and content hashing.
inline std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ull) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Derives an independent stream seed from a master seed and a stage tag,
// so pipeline stages never share RNG state.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view tag) {
    return splitmix64(master ^ fnv1a(tag));
}

inline std::uint64_t derive_seed(std::uint64_t master, std::string_view tag, std::uint64_t index) {
    return splitmix64(splitmix64(master ^ fnv1a(tag)) + index);
}

inline std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64(seed); }

}  // namespace depois
