#pragma once

// Reference computations for the finality and double-spend tests. Nothing
// here calls into the library: every estimate is produced from scratch.

#include <cstdint>

namespace oracle {

struct Estimate {
    double p = 0.0;
    double se = 0.0;
    std::uint64_t n = 0;
};

// Plain Monte Carlo of the catch-up race: the attacker's progress while the
// honest chain mines z blocks is Poisson(z q / p); the race then continues as
// a +1/-1 walk, truncated once the attacker is hopelessly far behind.
Estimate mc_catch_up(double q, int z, std::uint64_t trials, std::uint64_t seed);

// Same race under importance sampling: the Poisson phase is tilted to mean z
// and the walk to the swapped step probabilities, with the likelihood ratio
// accumulated step by step.
Estimate is_catch_up(double q, int z, std::uint64_t trials, std::uint64_t seed);

// Smallest z >= 1 whose importance-sampled estimate is <= epsilon.
int is_min_confirmations(double q, double epsilon, std::uint64_t trials, std::uint64_t seed);

// Exact success probability of the hold-until-depth double spend: the
// attacker forks just before the victim block, mines privately, and
// publishes as soon as it is strictly longer while the victim has at least
// `hold` confirmations; it gives up at `max_deficit` blocks behind
// (max_deficit <= 0: never).
double double_spend_race(double q, int hold, int max_deficit = 0);

// Two-sided binomial acceptance band half-width at the given z-score.
double binomial_margin(double p, std::uint64_t n, double zscore);

} // namespace oracle
