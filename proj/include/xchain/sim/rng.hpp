#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace xchain::sim {

// A labeled, reproducible random substream. The generator state is a pure
// function of (global seed, label), so adding a new consumer never shifts
// the draws of an existing one.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::string label);

    const std::string& label() const { return label_; }

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53 bits of resolution.
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n);

    double exponential(double mean);
    bool bernoulli(double p) { return uniform() < p; }

private:
    std::string label_;
    std::mt19937_64 engine_;
};

std::uint64_t hash_label(std::string_view label);

} // namespace xchain::sim
