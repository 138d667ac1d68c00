#include "xchain/finality/service.hpp"

#include <algorithm>

namespace xchain::finality {

FinalityService::FinalityService(sim::Kernel& kernel, std::vector<CollaborationPolicy> policies,
                                 double recompute_period, const FinalityModel& model)
    : kernel_(kernel), policies_(std::move(policies)), period_(recompute_period), model_(model)
{
}

void FinalityService::push_stats(ChainId chain, FinalityInputs inputs)
{
    auto floor = floors_.find(chain);
    if (floor != floors_.end()) inputs.q = std::max(inputs.q, floor->second);
    stats_[chain] = inputs;
    recompute();
}

void FinalityService::recompute()
{
    table_ = build_table(stats_, policies_, kernel_.now(), model_);
    last_recompute_ = kernel_.now();
    ++recomputes_;
}

void FinalityService::start()
{
    recompute();
    schedule_periodic();
}

void FinalityService::schedule_periodic()
{
    kernel_.schedule_in(period_, sim::EventKind::Timer, [this] {
        // A stats push inside the last period already refreshed the table.
        if (kernel_.now() - last_recompute_ >= period_) recompute();
        schedule_periodic();
    });
}

} // namespace xchain::finality
