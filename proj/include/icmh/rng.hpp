#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace icmh {

// Deterministic RNG. mt19937_64 has a standard-pinned sequence and the
// distributions below are implemented here rather than taken from
// <random>, so draws are bit-identical across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // [0, 1)
    double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    // [-1, 1)
    double uniform_pm1() { return 2.0 * uniform01() - 1.0; }

    // (lo, hi) via uniform01 scaled; used for parameter init
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Box-Muller, second value cached
    double normal(double mean = 0.0, double sd = 1.0);

    // Unbiased integer in [0, n); n > 0
    std::uint64_t bounded(std::uint64_t n);

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(bounded(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 gen_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

// Derives an independent stream seed from a master seed; the (master,
// stream) pair maps through a splitmix64-style mix so consumers can use
// small consecutive stream ids.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

}  // namespace icmh
