#pragma once

#include <bit>
#include <cstdint>
#include <string_view>

namespace openloop {

// splitmix64 finalizer
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30u)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27u)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31u);
}

constexpr std::uint64_t combine_seed(std::uint64_t seed, std::uint64_t value) {
    return mix64(seed ^ mix64(value));
}

// FNV-1a, stable across platforms and runs
constexpr std::uint64_t hash_name(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (char c : text) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::uint64_t hash_real(double v) {
    return std::bit_cast<std::uint64_t>(v == 0.0 ? 0.0 : v);
}

}  // namespace openloop
