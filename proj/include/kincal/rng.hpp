#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace kincal::rng {

/// mt19937_64 wrapped with hand-rolled distributions so that a seed produces
/// the same stream on every platform (the std distributions are
/// implementation-defined).
class Engine {
public:
    explicit Engine(std::uint64_t seed) : gen_(seed) {}

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Standard normal via Box-Muller; consumes exactly two uniforms per call.
    double gaussian() {
        double u1 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    double gaussian(double mean, double stddev) { return mean + stddev * gaussian(); }

    /// Uniform direction on the unit 2-sphere.
    Eigen::Vector3d unit_vector3() {
        Eigen::Vector3d v;
        double n;
        do {
            v = {gaussian(), gaussian(), gaussian()};
            n = v.norm();
        } while (n < 1e-12);
        return v / n;
    }

    /// Uniform index in [0, count).
    std::size_t index(std::size_t count) {
        return static_cast<std::size_t>(uniform01() * static_cast<double>(count));
    }

private:
    std::mt19937_64 gen_;
};

/// SplitMix64 step; used to derive independent stream seeds from one seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace kincal::rng
