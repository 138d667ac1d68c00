#pragma once

#include "xchain/chain/chain.hpp"
#include "xchain/sentinel/detectors.hpp"

#include <deque>
#include <set>
#include <vector>

namespace xchain::sentinel {

struct SentinelConfig {
    double sweep_period = 5.0;
    double heartbeat_timeout = 3.0;
    bool heartbeat = true;
    bool eclipse = true;
    bool ddos = true;
    bool selfish = true;
    EclipseParams eclipse_params;
    double ddos_window = 120.0;
    DdosParams ddos_params{5.0, 10.0, 0.5, 0.0};
    SelfishParams selfish_params{50, 0.2, 0.0}; // epsilon 0: twice the median gossip latency
    double breaker_threshold = 0.33;
    std::set<FlagReason> blacklist_reasons{FlagReason::DdosSource, FlagReason::SelfishGroup};
};

struct SweepReport {
    std::vector<FlagRecord> new_flags;
    BreakerState breaker;
    bool breaker_changed = false;
};

// Per-relay monitor over one chain. The relay feeds it observations; every
// sweep runs the detectors, updates flags, q_est and the breaker.
class Sentinel {
public:
    Sentinel(ChainId chain, std::vector<double> shares, SentinelConfig config, double median_latency);

    void record_ping(NodeId node, sim::Time sent);
    void record_reply(const chain::HeartbeatReply& reply, sim::Time received);
    void record_message(NodeId from, sim::Time at);
    void record_block(const chain::Block& block, sim::Time arrival);
    void record_growth(NodeId miner, sim::Time at);

    SweepReport sweep(sim::Time now);
    // Scenario-driven rehabilitation.
    SweepReport clear(const std::vector<NodeId>& nodes, sim::Time now);
    // Scenario-driven flag (e.g. an externally reported adversary).
    SweepReport force_flag(NodeId node, FlagReason reason, sim::Time now);

    const FlagSet& flags() const { return flags_; }
    double q_est() const { return breaker_.q_est; }
    const BreakerState& breaker() const { return breaker_; }
    const SentinelConfig& config() const { return config_; }
    std::map<NodeId, double> traffic_rates(sim::Time now);
    // Nodes whose flags call for a blacklist broadcast.
    std::vector<NodeId> blacklist_candidates() const;

private:
    bool is_miner(NodeId n) const { return n < shares_.size(); }
    void update_breaker(SweepReport& report);

    ChainId chain_;
    std::vector<double> shares_;
    SentinelConfig config_;
    FlagSet flags_;
    HeartbeatTracker heartbeat_;
    ReceptionLog receptions_;
    std::vector<GrowthSample> growth_;
    std::map<NodeId, std::deque<sim::Time>> traffic_;
    SelfishDetector selfish_;
    BreakerState breaker_;
    sim::Time started_ = -1.0;
};

} // namespace xchain::sentinel
