#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>

namespace flagwalk {

std::uint64_t splitmix64(std::uint64_t& state);

// xoshiro256** generator. Stream i of a seed is a pure function of (seed, i),
// so trajectories can be farmed out to any number of workers.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()();

    // Uniform in [0, 1) with 53 random bits.
    double uniform();
    // Standard normal via Box-Muller (no cached second value, so the stream
    // position depends only on the number of calls).
    double normal();
    // Index drawn from cumulative weights (last entry must be 1).
    std::size_t categorical(const double* cumulative, std::size_t count);

private:
    std::uint64_t s_[4];
};

// Reserved stream offsets for auxiliary randomness that must not collide
// with trajectory streams 0, 1, 2, ...
inline constexpr std::uint64_t kAuxStream = 0xA5A5'0000'0000'0000ULL;

}  // namespace flagwalk
