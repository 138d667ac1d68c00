#include "xchain/finality/table.hpp"

#include <limits>

namespace xchain::finality {

std::optional<double> epsilon_for_label(std::string_view label)
{
    if (label == "HIGH") return 1e-4;
    if (label == "MED") return 1e-3;
    if (label == "LOW") return 1e-2;
    return std::nullopt;
}

void validate(const FinalityInputs& in)
{
    if (!(in.q >= 0.0 && in.q < 1.0)) throw DomainError("q must lie in [0,1)");
    if (!(in.t_hat > 0.0)) throw DomainError("T_hat must be positive");
}

const char* to_string(EntryStatus s)
{
    switch (s) {
    case EntryStatus::Ok: return "ok";
    case EntryStatus::Halted: return "halted";
    case EntryStatus::MissingStats: return "missing-stats";
    }
    return "unknown";
}

const TableEntry* FinalityTimeTable::lookup(ChainId source, ChainId dest) const
{
    auto it = entries_.find({source, dest});
    return it == entries_.end() ? nullptr : &it->second;
}

FinalityTimeTable build_table(const std::map<ChainId, FinalityInputs>& stats,
                              const std::vector<CollaborationPolicy>& policies, sim::Time now,
                              const FinalityModel& model)
{
    FinalityTimeTable table;
    for (const auto& policy : policies) {
        TableEntry e;
        e.source = policy.source;
        e.dest = policy.dest;
        e.epsilon = policy.epsilon;
        e.computed_at = now;
        auto it = stats.find(policy.source);
        if (it == stats.end()) {
            e.status = EntryStatus::MissingStats;
            e.error = "no statistics for source chain";
            table.put(std::move(e));
            continue;
        }
        e.inputs = it->second;
        try {
            validate(e.inputs);
            const std::uint64_t z = min_confirmations(e.inputs.q, policy.epsilon, model);
            e.status = EntryStatus::Ok;
            e.z = z;
            e.advisory_wait = acceptance_period(z, e.inputs.t_hat);
        } catch (const NoFiniteDepth&) {
            e.status = EntryStatus::Halted;
            e.advisory_wait = std::numeric_limits<double>::infinity();
        } catch (const DomainError& err) {
            e.status = EntryStatus::MissingStats;
            e.error = err.what();
        }
        table.put(std::move(e));
    }
    return table;
}

} // namespace xchain::finality
