#pragma once

#include <cstdint>
#include <initializer_list>
#include <string_view>

namespace skycast {

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// FNV-1a over bytes; stable across platforms and runs.
constexpr std::uint64_t hash_string(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : text) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Order-sensitive combination of 64-bit words. Used for every derived seed.
constexpr std::uint64_t stable_hash(std::initializer_list<std::uint64_t> parts) {
    std::uint64_t h = 0x243f6a8885a308d3ULL;
    for (std::uint64_t p : parts) h = mix64(h ^ mix64(p));
    return h;
}

/// Uniform draw in [0, n) from a hash value (n small relative to 2^64).
constexpr std::uint64_t hash_to_range(std::uint64_t h, std::uint64_t n) { return h % n; }

}  // namespace skycast
