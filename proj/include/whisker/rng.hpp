#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace whisker {

// SplitMix64 finalizer.
inline constexpr uint64_t mix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Counter-based generator: every draw is a pure function of
// (seed, stream, counter), so values do not depend on evaluation order.
struct CounterRng {
    uint64_t seed = 0;
    uint64_t stream = 0;

    uint64_t bits(uint64_t counter, uint64_t salt = 0) const {
        uint64_t h = mix64(seed);
        h = mix64(h ^ mix64(stream + 0x632BE59BD9B4E019ULL));
        h = mix64(h ^ mix64(counter) ^ mix64(salt + 0xD1B54A32D192ED03ULL));
        return h;
    }

    // uniform in [0, 1)
    double uniform(uint64_t counter, uint64_t salt = 0) const {
        return static_cast<double>(bits(counter, salt) >> 11) * 0x1.0p-53;
    }

    // standard normal (Box-Muller); independent per (counter, salt)
    double gaussian(uint64_t counter, uint64_t salt = 0) const {
        const double u1 = 1.0 - uniform(counter, 2 * salt);  // (0, 1]
        const double u2 = uniform(counter, 2 * salt + 1);
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * 3.14159265358979323846 * u2);
    }
};

// FNV-1a 64-bit; used for content hashes in run manifests and for deriving
// per-component sub-seeds from a root seed.
inline constexpr uint64_t fnv1a(std::string_view s,
                                uint64_t h = 0xCBF29CE484222325ULL) {
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001B3ULL;
    }
    return h;
}

inline uint64_t derive_seed(uint64_t root, std::string_view component,
                            uint64_t index = 0) {
    return mix64(mix64(root) ^ fnv1a(component) ^ mix64(index));
}

} // namespace whisker
