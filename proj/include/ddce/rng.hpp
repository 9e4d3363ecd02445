// Seed mixing and Gaussian sampling. Every stochastic component draws
// through these helpers so traces and sweeps are reproducible bit for bit
// across runs and across worker counts; std::normal_distribution is not
// used anywhere because its output is implementation-defined.
#ifndef DDCE_RNG_HPP
#define DDCE_RNG_HPP

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace ddce {

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// Order-sensitive combination of a seed with stream labels.
inline uint64_t mix_seed(uint64_t seed, uint64_t a) { return splitmix64(seed ^ splitmix64(a)); }
inline uint64_t mix_seed(uint64_t seed, uint64_t a, uint64_t b) { return mix_seed(mix_seed(seed, a), b); }
inline uint64_t mix_seed(uint64_t seed, uint64_t a, uint64_t b, uint64_t c) {
    return mix_seed(mix_seed(seed, a, b), c);
}

inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53; // [0,1)
}

// N(0,1) real, Box-Muller.
inline double gaussian(std::mt19937_64& rng) {
    const double u1 = 1.0 - uniform01(rng); // (0,1]
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

// Standard circular complex Gaussian, E|z|^2 = 1.
inline std::complex<double> cgaussian(std::mt19937_64& rng) {
    const double u1 = 1.0 - uniform01(rng);
    const double u2 = uniform01(rng);
    const double r = std::sqrt(-std::log(u1));
    return {r * std::cos(2.0 * M_PI * u2), r * std::sin(2.0 * M_PI * u2)};
}

} // namespace ddce

#endif
