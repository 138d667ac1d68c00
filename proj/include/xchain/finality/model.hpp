#pragma once

#include <cstdint>
#include <stdexcept>
#include <string_view>

namespace xchain::finality {

class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Raised when the adversary holds half the power or more: no depth bounds
// the reversal probability below any epsilon < 1.
class NoFiniteDepth : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Probabilities smaller than this are reported as exactly zero.
inline constexpr double kProbabilityFloor = 1e-15;

// Pluggable reversal-probability model: P(an attacker with power fraction q
// eventually replaces a block that already has z blocks on top of it).
class FinalityModel {
public:
    virtual ~FinalityModel() = default;
    virtual std::string_view id() const = 0;
    virtual double reversal_probability(double q, std::int64_t z) const = 0;
};

// Attacker catch-up race: attacker progress while the honest network builds
// z blocks is Poisson with mean z*q/p, followed by a gambler's-ruin climb.
class CatchUpRaceModel final : public FinalityModel {
public:
    std::string_view id() const override { return "catch-up-race"; }
    double reversal_probability(double q, std::int64_t z) const override;
};

const FinalityModel& default_model();

double catch_up_probability(double q, std::int64_t z);

// Smallest z >= 1 with reversal_probability(q, z) <= epsilon.
std::uint64_t min_confirmations(double q, double epsilon, const FinalityModel& model = default_model());

// Advisory waiting time z * T_hat.
double acceptance_period(std::uint64_t z, double t_hat);

} // namespace xchain::finality
