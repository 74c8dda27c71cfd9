// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace d2dra {

inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Stream tags keep independent consumers of one master seed apart.
enum class StreamTag : std::uint64_t {
    Topology = 1,
    Fading = 2,
    RandomBaseline = 3,
    WeightInit = 4,
    Shuffle = 5,
    Dropout = 6,
    Bench = 7,
};

/// Deterministic per-(seed, tag, index) random stream.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}
    Rng(std::uint64_t master_seed, StreamTag tag, std::uint64_t index)
        : engine_(splitmix64(splitmix64(master_seed ^ splitmix64(static_cast<std::uint64_t>(tag))) + index))
    {
    }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer on [0, n).
    std::uint64_t below(std::uint64_t n)
    {
        // rejection sampling, no modulo bias
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    /// Unit-mean exponential, i.e. |g|^2 for g ~ CN(0, 1).
    double exponential() { return -std::log1p(-uniform()); }

    double normal()
    {
        // Box-Muller, one value per call
        const double u1 = 1.0 - uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

}  // namespace d2dra
