#pragma once

#include "xchain/chain/types.hpp"
#include "xchain/common/ids.hpp"
#include "xchain/sim/kernel.hpp"

#include <deque>
#include <map>
#include <set>
#include <span>
#include <vector>

namespace xchain::sentinel {

enum class FlagReason : std::uint8_t { Unresponsive, EclipseVictim, DdosSource, SelfishGroup };
const char* to_string(FlagReason r);

struct FlagRecord {
    NodeId node;
    FlagReason reason;
    sim::Time time;
};

// Flags are monotone for a run unless cleared explicitly.
class FlagSet {
public:
    explicit FlagSet(ChainId chain = 0) : chain_(chain) {}

    ChainId chain() const { return chain_; }
    // True when (node, reason) was not flagged before.
    bool add(NodeId node, FlagReason reason, sim::Time time);
    void clear(NodeId node);
    bool flagged(NodeId node) const { return reasons_.count(node) != 0; }
    bool has(NodeId node, FlagReason reason) const;
    std::set<NodeId> nodes() const;
    const std::vector<FlagRecord>& history() const { return history_; }

private:
    ChainId chain_;
    std::map<NodeId, std::set<FlagReason>> reasons_;
    std::vector<FlagRecord> history_;
};

// Sum of the shares of all flagged miners, each counted once whatever the
// number of reasons. Ids without a share (observers) contribute nothing.
double estimate_adversary(const FlagSet& flags, std::span<const double> shares);

// Tracks outstanding heartbeat pings per node.
class HeartbeatTracker {
public:
    void on_ping(NodeId node, sim::Time sent);
    void on_reply(NodeId node, sim::Time sent, sim::Time received, double timeout);
    void reset(NodeId node) { nodes_.erase(node); }
    // Nodes with a ping older than `timeout` still unanswered, or answered late.
    std::set<NodeId> unresponsive(sim::Time now, double timeout) const;

private:
    struct State {
        std::deque<sim::Time> outstanding;
        bool late = false;
    };
    std::map<NodeId, State> nodes_;
};

inline std::set<NodeId> heartbeat_check(const HeartbeatTracker& tracker, sim::Time now, double timeout)
{
    return tracker.unresponsive(now, timeout);
}

// Received-block counters reported by each node, in report order.
struct ReceptionSample {
    sim::Time time;
    std::uint64_t received;
};
using ReceptionLog = std::map<NodeId, std::vector<ReceptionSample>>;

// Best-chain growth as seen by the monitor: (arrival time, miner).
struct GrowthSample {
    sim::Time time;
    NodeId miner;
};

struct EclipseParams {
    double window = 120.0;
    std::uint64_t k = 3;
    double grace = 1.0; // growth this close to the newest report is ignored
};

// A node is a victim when its received count did not move across a window
// in which at least k best-chain blocks mined by others appeared.
std::set<NodeId> detect_eclipse(const ReceptionLog& log, std::span<const GrowthSample> growth,
                                sim::Time now, const EclipseParams& params);

struct DdosParams {
    double k_sigma = 5.0;
    double fallback_multiple = 10.0; // used when peer rates have zero spread
    double min_rate = 0.0;           // messages per second below which nobody is flagged
    // Counting window in seconds. When positive, the peer spread is floored
    // at the Poisson noise of the peer mean count.
    double window = 0.0;
};

// Each node's rate is compared against the mean and standard deviation of
// the other nodes' rates.
std::set<NodeId> detect_ddos(const std::map<NodeId, double>& rates, const DdosParams& params);

struct SelfishParams {
    std::size_t window = 50; // W: published blocks per miner
    double theta = 0.2;
    double epsilon = 0.6; // seconds between consecutive releases of a burst
};

// Watches block publications for multi-block atomic releases: consecutive
// blocks of one miner, each parented on the previous, arriving within
// epsilon of each other.
class SelfishDetector {
public:
    explicit SelfishDetector(SelfishParams params = {}) : params_(params) {}

    void observe(const chain::Block& block, sim::Time arrival);
    std::set<NodeId> detect() const;
    double burst_fraction(NodeId miner) const;
    std::size_t published(NodeId miner) const;

private:
    struct Seen {
        NodeId miner;
        sim::Time arrival;
        std::size_t slot; // index in the miner's history
    };
    struct History {
        std::vector<bool> burst;
    };
    void mark(NodeId miner, std::size_t slot);

    SelfishParams params_;
    std::map<BlockId, Seen> seen_;
    std::multimap<BlockId, BlockId> children_; // parent -> seen children
    std::map<NodeId, History> history_;
};

struct BreakerState {
    ChainId chain = 0;
    bool open = false;
    double q_est = 0.0;
    double threshold = 0.33;
};

// Open (halted) iff q_est >= threshold. Threshold must lie in (0, 0.5].
BreakerState circuit_breaker(ChainId chain, double q_est, double threshold = 0.33);

} // namespace xchain::sentinel
