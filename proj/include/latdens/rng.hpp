#pragma once

#include <cmath>
#include <cstdint>

namespace latdens::rng {

// splitmix64 step (Steele, Lea, Flood 2014).
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Mixes a seed with up to three stream indices into a single key.
// Used to derive independent, schedule-invariant substreams, e.g.
// (seed, iteration, group, draw) in the E-step or
// (master seed, m, replicate) in the simulation harness.
inline std::uint64_t derive_key(std::uint64_t seed, std::uint64_t a,
                                std::uint64_t b = 0, std::uint64_t c = 0) {
    std::uint64_t s = seed;
    std::uint64_t k = splitmix64(s);
    s ^= a + 0x9e3779b97f4a7c15ULL;
    k ^= splitmix64(s);
    s ^= b + 0xc2b2ae3d27d4eb4fULL;
    k ^= splitmix64(s);
    s ^= c + 0x165667b19e3779f9ULL;
    k ^= splitmix64(s);
    return k;
}

// Minimal counter-free generator with explicit state. Deterministic for a
// given key independent of platform RNG library internals.
class Stream {
public:
    explicit Stream(std::uint64_t key) : state_(key) {
        // Burn one step so nearby keys decorrelate.
        splitmix64(state_);
    }

    std::uint64_t next_u64() { return splitmix64(state_); }

    // Uniform on [0, 1), 53-bit resolution.
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller. One value per call.
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        // Guard against log(0).
        u1 = 1.0 - u1;
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(6.283185307179586476925286766559 * u2);
    }

private:
    std::uint64_t state_;
};

}  // namespace latdens::rng
