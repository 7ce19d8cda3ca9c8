// Small shared utilities: counter-based hashing for reproducible sampling
// and locale-independent numeric formatting for trace files.
#pragma once

#include <cstdint>
#include <cstdio>
#include <string>

namespace dropt {

// splitmix64 finalizer. Good avalanche behaviour, cheap, stateless.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Combines a seed with up to three coordinates into one hash. Used for
// counter-based sampling: the value depends only on the inputs, never on
// call order, so replays are exact.
inline std::uint64_t hash_coords(std::uint64_t seed, std::uint64_t a,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
    std::uint64_t h = mix64(seed ^ 0x243f6a8885a308d3ULL);
    h = mix64(h ^ a);
    h = mix64(h ^ b);
    h = mix64(h ^ c);
    return h;
}

// Uniform integer in [lo, hi] from a hash value (unbiased via rejection-free
// 128-bit multiply; bias is < 2^-64, irrelevant at our sample counts).
inline int hash_uniform_int(std::uint64_t h, int lo, int hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    const auto wide = static_cast<__uint128_t>(h) * span;
    return lo + static_cast<int>(wide >> 64);
}

// Shortest round-trip-exact decimal for a double, C locale, deterministic.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace dropt
