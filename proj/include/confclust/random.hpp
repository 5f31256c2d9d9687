#ifndef CONFCLUST_RANDOM_HPP
#define CONFCLUST_RANDOM_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace confclust {

/// SplitMix64 finalizer; used to derive independent per-stream seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632BE59BD9B4E019ULL));
}

/**
 * mt19937_64 with hand-rolled uniform and normal transforms.
 *
 * The standard library's distributions are implementation-defined, so the
 * conversions are done here to keep draws identical across toolchains.
 */
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    Rng(std::uint64_t seed, std::uint64_t stream) : engine_(stream_seed(seed, stream)) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Standard normal via Box-Muller (one value per call, no caching).
    double normal() {
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    bool bernoulli(double p) { return uniform() < p; }

private:
    std::mt19937_64 engine_;
};

} // namespace confclust

#endif
