#pragma once

#include "xchain/chain/chain.hpp"
#include "xchain/connector/cluster.hpp"
#include "xchain/finality/service.hpp"
#include "xchain/relay/audit.hpp"
#include "xchain/sentinel/sentinel.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>

namespace xchain::relay {

struct RelayConfig {
    double poll_period = 1.0;
    double stats_period = 10.0;
    std::size_t stats_window = 100; // best-chain blocks
    double retry_initial = 1.0;
    double retry_cap = 30.0;
};

struct PendingTransfer {
    chain::TxPtr tx;
    BlockId origin = kNoBlock; // kNoBlock after a reorg reset
    TransferState state = TransferState::Observed;
    std::uint64_t depth = 0;
    std::optional<std::uint64_t> z; // snapshot at observation
    sim::Time observed_at = 0.0;
    double backoff = 0.0;
    bool in_flight = false;
};

struct NetworkStats {
    ChainId chain = 0;
    bool warming_up = true;
    double t_hat = 0.0;
    double stale_rate = 0.0;
    double q_est = 0.0;
    std::map<NodeId, std::uint64_t> messages;
    sim::Time window_start = 0.0;
    sim::Time window_end = 0.0;
};

// Callbacks into the run that owns the relay.
struct RelayHooks {
    // Origin block of a transfer at or past Matured left the best chain.
    std::function<void(TxId, sim::Time)> on_reversal;
    // An inbound ledger entry was injected into this relay's chain.
    std::function<void(const connector::LedgerEntry&, sim::Time)> on_delivered;
    std::function<void(const std::string&)> on_violation;
    // True while this relay is the one feeding the chain's sentinel.
    std::function<bool()> is_monitor;
};

class RelayNode final : public chain::ChainObserver {
public:
    RelayNode(RelayId id, chain::Chain& chain, connector::Cluster& cluster, finality::FinalityService& finality,
              sentinel::Sentinel& sentinel, AuditLog& audit, RelayHooks hooks, RelayConfig config = {});

    RelayNode(const RelayNode&) = delete;
    RelayNode& operator=(const RelayNode&) = delete;

    RelayId id() const { return id_; }
    ChainId chain_id() const { return chain_.id(); }
    NodeId node() const { return node_; }
    bool crashed() const { return crashed_; }

    void start();
    void crash();
    void recover();

    // ChainObserver
    void on_tip_change(const chain::TipChange& change) override;
    void on_block_received(const chain::BlockPtr& block, sim::Time at) override;
    void on_message(NodeId from, chain::MessageKind kind) override;

    void mature_and_submit();
    void poll_ledger_and_deliver();
    NetworkStats report_stats();
    // Heartbeats to every miner, then a detector sweep.
    sentinel::SweepReport sweep();
    // Breaker opened: everything not yet handed to the connector is dropped.
    void drop_pending();

    const std::map<TxId, PendingTransfer>& transfers() const { return transfers_; }
    const NetworkStats& last_stats() const { return stats_; }
    std::uint64_t read_offset() const { return offset_; }
    std::uint64_t injections() const { return injections_; }

private:
    void observe(const chain::BlockPtr& block);
    void transition(PendingTransfer& t, TransferState to);
    void submit(TxId id);
    void schedule_retry(TxId id);
    void schedule_periodic(double period, void (RelayNode::*fn)());
    void poll_tick() { poll_ledger_and_deliver(); }
    void stats_tick() { report_stats(); }
    bool monitoring() const { return !crashed_ && (!hooks_.is_monitor || hooks_.is_monitor()); }
    const chain::BlockStore& store() const { return chain_.node(node_).store; }

    RelayId id_;
    chain::Chain& chain_;
    connector::Cluster& cluster_;
    finality::FinalityService& finality_;
    sentinel::Sentinel& sentinel_;
    AuditLog& audit_;
    RelayHooks hooks_;
    RelayConfig config_;
    NodeId node_;
    sim::RngStream& jitter_;
    std::map<TxId, PendingTransfer> transfers_;
    std::map<NodeId, std::uint64_t> messages_;
    std::uint64_t received_blocks_ = 0;
    std::uint64_t offset_ = 0; // last ledger seq read
    std::uint64_t injections_ = 0;
    std::uint64_t epoch_ = 0;  // bumps on crash; stale callbacks compare against it
    bool crashed_ = false;
    bool started_ = false;
    NetworkStats stats_;
};

} // namespace xchain::relay
