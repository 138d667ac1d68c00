#pragma once

#include "xchain/chain/attacks.hpp"
#include "xchain/connector/cluster.hpp"
#include "xchain/finality/service.hpp"
#include "xchain/harness/scenario.hpp"
#include "xchain/relay/relay_node.hpp"
#include "xchain/sentinel/sentinel.hpp"

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace xchain::harness {

// One row of the flag/breaker log. `node` is empty for breaker transitions.
struct FlagEvent {
    sim::Time time = 0.0;
    ChainId chain = 0;
    std::optional<NodeId> node;
    std::string reason;
    double q_est = 0.0;
    bool breaker_open = false;
};

struct BreakerEpisode {
    ChainId chain = 0;
    sim::Time opened = 0.0;
    std::optional<sim::Time> closed;
};

struct ChainMetrics {
    std::string name;
    std::uint64_t mined = 0;
    std::uint64_t best_height = 0;
    std::uint64_t stale = 0; // published blocks off the final best chain
    double t_hat = 0.0;
    double q_est = 0.0;
    bool breaker_open = false;
};

struct LatencySummary {
    std::uint64_t count = 0;
    double mean = 0.0;
    double p50 = 0.0;
    double p95 = 0.0;
    double max = 0.0;
};

struct MetricsReport {
    std::uint64_t seed = 0;
    double duration = 0.0;
    std::vector<ChainMetrics> chains;
    std::uint64_t scripted = 0;
    std::uint64_t observed = 0;
    std::uint64_t delivered = 0;
    std::uint64_t dropped = 0;
    std::uint64_t pending = 0;
    std::uint64_t scripted_delivered = 0;
    std::uint64_t ledger_length = 0;
    LatencySummary delivery_latency; // first observation -> delivery
    std::uint64_t reversals = 0;     // origin pruned at or past Matured
    std::uint64_t reversed_after_delivery = 0;
    std::uint64_t double_spend_attempts = 0;
    std::uint64_t double_spend_published = 0;
    std::vector<FlagEvent> flags;
    std::vector<BreakerEpisode> breakers;
    std::vector<std::string> violations;
    std::uint64_t events = 0;
};

class World {
public:
    explicit World(Scenario scenario, std::optional<std::uint64_t> seed = std::nullopt);
    ~World();

    World(const World&) = delete;
    World& operator=(const World&) = delete;

    // Runs to the scenario duration, then checks end-of-run invariants.
    void run();
    MetricsReport report() const;

    const Scenario& scenario() const { return scenario_; }
    std::uint64_t seed() const { return seed_; }
    sim::Kernel& kernel() { return kernel_; }
    chain::Chain& chain(ChainId id) { return *chains_.at(id); }
    const chain::Chain& chain(ChainId id) const { return *chains_.at(id); }
    connector::Cluster& cluster() { return *cluster_; }
    const connector::Cluster& cluster() const { return *cluster_; }
    finality::FinalityService& finality() { return *finality_; }
    sentinel::Sentinel& sentinel(ChainId id) { return *sentinels_.at(id); }
    relay::RelayNode& relay(ChainId chain, std::uint32_t index) { return *relays_.at(chain).at(index); }
    const relay::RelayNode& relay(ChainId chain, std::uint32_t index) const { return *relays_.at(chain).at(index); }
    const relay::AuditLog& audit() const { return audit_; }
    const std::vector<FlagEvent>& flag_log() const { return flags_; }
    const std::vector<BreakerEpisode>& breaker_episodes() const { return episodes_; }
    const std::vector<std::string>& violations() const { return violations_; }
    const chain::AttackSet& attacks() const { return attacks_; }
    const std::vector<TxId>& scripted() const { return scripted_; }
    std::optional<sim::Time> delivered_at(TxId tx) const;
    // First time `node` of `chain` was flagged for `reason`.
    std::optional<sim::Time> first_flag(ChainId chain, NodeId node, sentinel::FlagReason reason) const;
    // Whether the tx sits on the source chain's best chain as seen by its first relay.
    bool on_source_chain(ChainId source, TxId tx) const;

private:
    void wire();
    void schedule_traffic();
    void schedule_intra(ChainId c);
    void schedule_sweep(ChainId c, sim::Time at);
    void schedule_faults();
    void apply(const FaultScript& f);
    void handle(ChainId c, const sentinel::SweepReport& report);
    std::optional<std::uint32_t> monitor_of(ChainId c) const;
    NodeId pick_entry(ChainId c, sim::RngStream& rng);
    void check_invariants();
    void violation(std::string what);

    Scenario scenario_;
    std::uint64_t seed_;
    sim::Kernel kernel_;
    chain::TxIdAllocator ids_;
    std::vector<std::unique_ptr<chain::Chain>> chains_;
    std::unique_ptr<connector::Cluster> cluster_;
    std::unique_ptr<finality::FinalityService> finality_;
    std::vector<std::unique_ptr<sentinel::Sentinel>> sentinels_;
    std::vector<std::vector<std::unique_ptr<relay::RelayNode>>> relays_;
    chain::AttackSet attacks_;
    relay::AuditLog audit_;
    std::vector<FlagEvent> flags_;
    std::vector<BreakerEpisode> episodes_;
    std::vector<std::string> violations_;
    std::vector<TxId> scripted_;
    std::map<TxId, sim::Time> delivered_;
    std::map<TxId, std::uint64_t> delivery_count_;
    std::map<TxId, std::vector<sim::Time>> reversals_;
    bool ran_ = false;
};

} // namespace xchain::harness
