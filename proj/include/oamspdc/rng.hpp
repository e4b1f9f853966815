#pragma once

#include <cstdint>

namespace oamspdc {

/// Counter-seeded xoshiro256++ stream. Streams are derived from a master
/// seed and a stream tag through splitmix64, so per-grid-point and
/// per-channel streams are independent and the merged results do not depend
/// on evaluation order or worker count.
class RngStream {
public:
    RngStream(std::uint64_t master_seed, std::uint64_t stream_tag);

    std::uint64_t next_u64();

    /// Uniform double in [0, 1).
    double uniform();

    /// Exponential waiting time with the given rate (mean 1/rate).
    double exponential(double rate);

    /// Exact Poisson count by exponential-gap accumulation; O(mean).
    std::uint64_t poisson(double mean);

    /// Exact binomial count as n Bernoulli trials; O(n).
    std::uint64_t binomial(std::uint64_t n, double p);

private:
    std::uint64_t s_[4];
};

} // namespace oamspdc
