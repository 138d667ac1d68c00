#include "xchain/finality/model.hpp"

#include <cmath>
#include <string>

namespace xchain::finality {

namespace {

void check_inputs(double q, std::int64_t z)
{
    if (!(q >= 0.0 && q <= 1.0)) throw DomainError("adversary fraction q=" + std::to_string(q) + " outside [0,1]");
    if (z < 0) throw DomainError("confirmation count must be nonnegative");
}

} // namespace

double CatchUpRaceModel::reversal_probability(double q, std::int64_t z) const
{
    check_inputs(q, z);
    if (q >= 0.5 || z == 0) return 1.0;
    if (q == 0.0) return 0.0;

    // 1 - sum_{k<=z} Pois(k)(1 - r^{z-k}) rewritten as
    //   sum_{k>z} Pois(k) + sum_{k<=z} Pois(k) r^{z-k}
    // so every term is positive and nothing cancels.
    const double p = 1.0 - q;
    const double lambda = static_cast<double>(z) * q / p;
    const double log_lambda = std::log(lambda);
    const double log_r = std::log(q / p);
    auto log_pois = [&](double k) { return -lambda + k * log_lambda - std::lgamma(k + 1.0); };

    double total = 0.0;
    for (std::int64_t k = 0; k <= z; ++k) {
        const double kd = static_cast<double>(k);
        total += std::exp(log_pois(kd) + static_cast<double>(z - k) * log_r);
    }
    // Upper Poisson tail; terms decay geometrically once k > lambda.
    for (std::int64_t k = z + 1;; ++k) {
        const double term = std::exp(log_pois(static_cast<double>(k)));
        total += term;
        if (term < total * 1e-18 || term == 0.0) break;
    }
    if (total < kProbabilityFloor) return 0.0;
    return total > 1.0 ? 1.0 : total;
}

const FinalityModel& default_model()
{
    static const CatchUpRaceModel model;
    return model;
}

double catch_up_probability(double q, std::int64_t z) { return default_model().reversal_probability(q, z); }

std::uint64_t min_confirmations(double q, double epsilon, const FinalityModel& model)
{
    if (!(q >= 0.0 && q <= 1.0)) throw DomainError("adversary fraction q outside [0,1]");
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw DomainError("epsilon must lie in (0,1)");
    if (q >= 0.5) throw NoFiniteDepth("no finite confirmation depth for q=" + std::to_string(q));

    constexpr std::int64_t kLinearLimit = 2048;
    for (std::int64_t z = 1; z <= kLinearLimit; ++z) {
        if (model.reversal_probability(q, z) <= epsilon) return static_cast<std::uint64_t>(z);
    }
    // Near q = 0.5 the depth grows without bound; gallop then bisect,
    // relying on monotonicity in z.
    std::int64_t lo = kLinearLimit;
    std::int64_t hi = 2 * kLinearLimit;
    while (model.reversal_probability(q, hi) > epsilon) {
        lo = hi;
        if (hi > (std::int64_t{1} << 40)) throw NoFiniteDepth("confirmation depth search diverged");
        hi *= 2;
    }
    while (hi - lo > 1) {
        const std::int64_t mid = lo + (hi - lo) / 2;
        if (model.reversal_probability(q, mid) <= epsilon) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return static_cast<std::uint64_t>(hi);
}

double acceptance_period(std::uint64_t z, double t_hat)
{
    if (!(t_hat > 0.0)) throw DomainError("block interval must be positive");
    return static_cast<double>(z) * t_hat;
}

} // namespace xchain::finality
