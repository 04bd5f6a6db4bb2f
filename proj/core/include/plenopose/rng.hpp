#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace plenopose {

// All randomness in the toolkit flows from one config seed through named
// substreams so results do not depend on evaluation order or thread count.

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Mix a base seed with a stream tag and up to three indices into a fresh
/// engine seed. Identical arguments always give the identical stream.
inline uint64_t derive_seed(uint64_t base, std::string_view tag, uint64_t a = 0,
                            uint64_t b = 0, uint64_t c = 0) {
    uint64_t h = base;
    for (char ch : tag) h = splitmix64(h ^ static_cast<uint64_t>(ch));
    h = splitmix64(h ^ a);
    h = splitmix64(h ^ b);
    h = splitmix64(h ^ c);
    return h;
}

inline std::mt19937_64 make_engine(uint64_t base, std::string_view tag,
                                   uint64_t a = 0, uint64_t b = 0,
                                   uint64_t c = 0) {
    return std::mt19937_64(derive_seed(base, tag, a, b, c));
}

}  // namespace plenopose
