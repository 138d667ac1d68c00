#pragma once

#include "xchain/finality/table.hpp"

namespace xchain::finality {

// The running finality module: holds the latest statistics per chain and
// the collaboration policies, and keeps the time table current.
class FinalityService {
public:
    FinalityService(sim::Kernel& kernel, std::vector<CollaborationPolicy> policies,
                    double recompute_period = 30.0, const FinalityModel& model = default_model());

    // Lower bound applied to every reported q for the chain (assumed adversary).
    void set_adversary_floor(ChainId chain, double q) { floors_[chain] = q; }

    // Stats push from a relay; recomputes the table immediately.
    void push_stats(ChainId chain, FinalityInputs inputs);
    void start();
    void recompute();

    const FinalityTimeTable& table() const { return table_; }
    const std::vector<CollaborationPolicy>& policies() const { return policies_; }
    const std::map<ChainId, FinalityInputs>& stats() const { return stats_; }
    std::uint64_t recompute_count() const { return recomputes_; }

private:
    void schedule_periodic();

    sim::Kernel& kernel_;
    std::vector<CollaborationPolicy> policies_;
    double period_;
    const FinalityModel& model_;
    std::map<ChainId, double> floors_;
    std::map<ChainId, FinalityInputs> stats_;
    FinalityTimeTable table_;
    std::uint64_t recomputes_ = 0;
    sim::Time last_recompute_ = -1.0;
};

} // namespace xchain::finality
