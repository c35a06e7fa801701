#include "icmh/rng.hpp"

#include <cmath>
#include <numbers>

namespace icmh {

double Rng::normal(double mean, double sd) {
    if (has_cached_) {
        has_cached_ = false;
        return mean + sd * cached_;
    }
    // u1 in (0,1] so the log is finite
    const double u1 = 1.0 - uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    cached_ = r * std::sin(theta);
    has_cached_ = true;
    return mean + sd * r * std::cos(theta);
}

std::uint64_t Rng::bounded(std::uint64_t n) {
    // rejection sampling over the largest multiple of n
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
        const std::uint64_t x = gen_();
        if (x >= threshold) return x % n;
    }
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    std::uint64_t z = master + (stream + 1) * 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

}  // namespace icmh
