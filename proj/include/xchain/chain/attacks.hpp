#pragma once

#include "xchain/chain/chain.hpp"

#include <limits>
#include <memory>
#include <optional>
#include <vector>

namespace xchain::chain {

enum class AttackKind : std::uint8_t { SelfishMining, Eclipse, Ddos, DoubleSpend, CrashSilence };

const char* to_string(AttackKind kind);
std::optional<AttackKind> parse_attack_kind(std::string_view text);

struct AttackSpec {
    AttackKind kind = AttackKind::SelfishMining;
    ChainId chain = 0;
    // Attacking miners, or the victims for an eclipse.
    std::vector<NodeId> nodes;
    sim::Time start = 0.0;
    sim::Time stop = std::numeric_limits<double>::infinity();
    double rate = 0.0; // ddos messages per second

    // double-spend
    ChainId victim_dest = 0;
    std::uint64_t hold_depth = 0;  // publish only once the victim has this depth
    std::uint64_t max_deficit = 20; // give up when this far behind

    bool uses_attackers() const { return kind != AttackKind::Eclipse; }
};

struct DoubleSpendOutcome {
    std::optional<TxId> victim;
    bool published = false;
    bool gave_up = false;
    sim::Time resolved_at = 0.0;
};

class AttackController {
public:
    explicit AttackController(AttackSpec spec) : spec_(std::move(spec)) {}
    virtual ~AttackController() = default;

    const AttackSpec& spec() const { return spec_; }
    // Schedules the start/stop transitions on the kernel.
    virtual void arm() = 0;

    // Only meaningful for double-spend controllers.
    virtual const DoubleSpendOutcome* double_spend() const { return nullptr; }

protected:
    AttackSpec spec_;
};

std::unique_ptr<AttackController> make_attack(Chain& chain, AttackSpec spec, TxIdAllocator& ids);

class AttackConflict : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Owns every controller of a run; rejects overlapping attacker sets.
class AttackSet {
public:
    AttackController& add(Chain& chain, AttackSpec spec, TxIdAllocator& ids);
    void arm_all();
    const std::vector<std::unique_ptr<AttackController>>& controllers() const { return controllers_; }

private:
    std::vector<std::unique_ptr<AttackController>> controllers_;
};

} // namespace xchain::chain
