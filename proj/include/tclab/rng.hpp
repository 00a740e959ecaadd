#ifndef TCLAB_RNG_HPP
#define TCLAB_RNG_HPP

#include <cmath>
#include <cstdint>

namespace tclab {

/// Counter-style splitmix64 stream.  Cheap, seedable, and good enough for
/// desk-scale Monte Carlo; independent streams come from derive_stream so
/// results do not depend on the worker count.
struct SplitMix64 {
    std::uint64_t state = 0;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    /// Uniform on the open interval (0,1).
    double uniform01() { return (static_cast<double>(next() >> 12) + 0.5) * 0x1.0p-52; }

    double exponential(double rate) { return -std::log(uniform01()) / rate; }
};

inline std::uint64_t mix_u64(std::uint64_t x) {
    x ^= x >> 33;
    x *= 0xFF51AFD7ED558CCDull;
    x ^= x >> 33;
    x *= 0xC4CEB9FE1A85EC53ull;
    x ^= x >> 33;
    return x;
}

inline SplitMix64 derive_stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    return SplitMix64(mix_u64(seed + 0x9E3779B97F4A7C15ull * (a + 1)) ^ mix_u64(b + 1));
}

}  // namespace tclab

#endif
