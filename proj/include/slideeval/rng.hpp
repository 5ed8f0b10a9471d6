#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace slideeval {

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = 0xCBF29CE484222325ULL);

/// Counter-based generator: the n-th draw is splitmix64(seed + n * golden).
/// Streams depend only on (seed, n), so they are identical on every
/// platform and any draw can be recomputed without replaying the stream.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t next_u64();
    /// Uniform in [0, 1) with 53 random bits.
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Box-Muller; consumes exactly two draws.
    double normal(double mean, double stddev);
    bool bernoulli(double p) { return uniform() < p; }
    /// Uniform integer in [0, n). n must be > 0.
    std::size_t index(std::size_t n);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t draws() const { return counter_; }

private:
    std::uint64_t seed_;
    std::uint64_t counter_ = 0;
};

}  // namespace slideeval
