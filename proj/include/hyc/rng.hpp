#ifndef HYC_RNG_HPP
#define HYC_RNG_HPP

#include <cstdint>
#include <random>

namespace hyc {

// Deterministic stream splitting: every sampling worker gets its own
// mt19937_64 engine whose seed is derived from (base seed, stream index)
// through a splitmix64 mix. Identical (seed, index) pairs yield identical
// streams on every platform; the uniform mappings below avoid
// std::uniform_real_distribution, whose output is implementation-defined.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

class RngStream {
public:
    RngStream() : engine_(0) {}
    RngStream(std::uint64_t seed, std::uint64_t stream)
        : engine_(splitmix64(splitmix64(seed) ^ splitmix64(stream * 0x9E3779B97F4A7C15ULL + 1))) {}

    std::uint64_t bits() { return engine_(); }

    // Uniform on [0,1), 53-bit resolution.
    double uniform01() { return static_cast<double>(bits() >> 11) * 0x1.0p-53; }

    // Uniform on the open interval (0,1); rejects the measure-zero 0.
    double uniformOpen01() {
        for (;;) {
            double u = uniform01();
            if (u > 0.0) return u;
        }
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        // Lemire-style rejection to stay unbiased.
        std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            std::uint64_t r = bits();
            if (r >= threshold) return r % n;
        }
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace hyc

#endif  // HYC_RNG_HPP
