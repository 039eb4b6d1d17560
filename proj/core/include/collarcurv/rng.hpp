#pragma once

#include <cstdint>

namespace collarcurv {

/// SplitMix64: tiny deterministic generator, identical across platforms.
/// Randomized suites derive one child seed per trial so trials stay
/// independent of evaluation order.
struct SplitMix64 {
    std::uint64_t state = 0x9e3779b97f4a7c15ull;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1).
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

    /// Uniform integer in [0, m).
    std::uint64_t below(std::uint64_t m) { return next() % m; }
};

/// Child seed for trial `i` under base seed `s`.
inline std::uint64_t derive_seed(std::uint64_t s, std::uint64_t i) {
    SplitMix64 g(s ^ (0x632be59bd9b4e019ull * (i + 1)));
    return g.next();
}

} // namespace collarcurv
