#pragma once

#include "xchain/common/ids.hpp"
#include "xchain/finality/model.hpp"
#include "xchain/sim/kernel.hpp"

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace xchain::finality {

// Target security level between an ordered pair of chains: the largest
// tolerated probability that an executed transfer is reverted at its source.
struct CollaborationPolicy {
    ChainId source = 0;
    ChainId dest = 0;
    double epsilon = 1e-3;
};

// HIGH / MED / LOW -> 1e-4 / 1e-3 / 1e-2.
std::optional<double> epsilon_for_label(std::string_view label);

struct FinalityInputs {
    double q = 0.0;     // adversary mining-power fraction
    double t_hat = 0.0; // estimated mean block interval, seconds

    bool operator==(const FinalityInputs&) const = default;
};

void validate(const FinalityInputs& in);

enum class EntryStatus : std::uint8_t { Ok, Halted, MissingStats };
const char* to_string(EntryStatus s);

struct TableEntry {
    ChainId source = 0;
    ChainId dest = 0;
    EntryStatus status = EntryStatus::MissingStats;
    double epsilon = 0.0;
    std::optional<std::uint64_t> z; // empty when halted or missing
    double advisory_wait = 0.0;
    sim::Time computed_at = 0.0;
    FinalityInputs inputs;
    std::string error;

    bool usable() const { return status == EntryStatus::Ok; }
};

class FinalityTimeTable {
public:
    using Key = std::pair<ChainId, ChainId>;

    const TableEntry* lookup(ChainId source, ChainId dest) const;
    const std::map<Key, TableEntry>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }
    void put(TableEntry e) { entries_[{e.source, e.dest}] = std::move(e); }

private:
    std::map<Key, TableEntry> entries_;
};

FinalityTimeTable build_table(const std::map<ChainId, FinalityInputs>& stats,
                              const std::vector<CollaborationPolicy>& policies, sim::Time now,
                              const FinalityModel& model = default_model());

} // namespace xchain::finality
