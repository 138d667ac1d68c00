#include "xchain/sim/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace xchain::sim {

std::uint64_t hash_label(std::string_view label)
{
    // FNV-1a 64
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : label) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

RngStream::RngStream(std::uint64_t seed, std::string label)
    : label_(std::move(label))
{
    const std::uint64_t h = hash_label(label_);
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
    engine_.seed(seq);
}

double RngStream::uniform()
{
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t RngStream::below(std::uint64_t n)
{
    if (n == 0) throw std::invalid_argument("RngStream::below: empty range");
    // Rejection sampling keeps the result unbiased and platform independent.
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % n);
    std::uint64_t x;
    do {
        x = engine_();
    } while (x >= limit);
    return x % n;
}

double RngStream::exponential(double mean)
{
    return -mean * std::log1p(-uniform());
}

} // namespace xchain::sim
