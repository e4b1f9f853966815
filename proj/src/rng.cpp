#include "oamspdc/rng.hpp"

#include <cmath>

namespace oamspdc {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t v, int k) {
    return (v << k) | (v >> (64 - k));
}

} // namespace

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t stream_tag) {
    std::uint64_t x = master_seed ^ (0xd1b54a32d192ed03ull * (stream_tag + 1));
    for (auto& s : s_) s = splitmix64(x);
    // xoshiro must not start from the all-zero state
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
}

std::uint64_t RngStream::next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double RngStream::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::exponential(double rate) {
    // -log(1 - u) keeps the draw finite since u < 1
    return -std::log1p(-uniform()) / rate;
}

std::uint64_t RngStream::poisson(double mean) {
    if (!(mean > 0.0)) return 0;
    double acc = 0.0;
    std::uint64_t n = 0;
    while (true) {
        acc += exponential(1.0);
        if (acc >= mean) break;
        ++n;
    }
    return n;
}

std::uint64_t RngStream::binomial(std::uint64_t n, double p) {
    if (p <= 0.0) return 0;
    if (p >= 1.0) return n;
    std::uint64_t k = 0;
    for (std::uint64_t i = 0; i < n; ++i)
        if (uniform() < p) ++k;
    return k;
}

} // namespace oamspdc
