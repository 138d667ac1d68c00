#pragma once

#include "xchain/connector/raft_node.hpp"

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <vector>

namespace xchain::connector {

// The consensus module: a crash-fault-tolerant replicated ledger of matured
// inter-chain transfers. Clients talk to it only through submit/read_from.
class Cluster {
public:
    using AcceptedFn = std::function<void()>;
    using DoneFn = std::function<void(SubmitResult)>;

    Cluster(sim::Kernel& kernel, ClusterConfig config = {});

    Cluster(const Cluster&) = delete;
    Cluster& operator=(const Cluster&) = delete;

    void start();

    // Routes the tx to the current leader. `on_accepted` fires once a leader
    // has the entry in its log; `on_done` fires exactly once, with the commit
    // seq or with Timeout after config.client_timeout.
    void submit(const InterChainTx& tx, AcceptedFn on_accepted, DoneFn on_done);

    // Committed entries with seq >= from, read from the most advanced live node.
    std::vector<LedgerEntry> read_from(std::uint64_t from) const;

    // The first-observed commit of every seq, across all replicas.
    const std::vector<LedgerEntry>& committed() const { return committed_; }
    std::optional<std::uint64_t> lookup(TxId tx) const;

    void crash(std::size_t node);
    void recover(std::size_t node);
    std::optional<std::size_t> leader() const;
    std::size_t live_count() const;

    std::size_t size() const { return nodes_.size(); }
    const RaftNode& node(std::size_t i) const { return *nodes_.at(i); }
    const ClusterConfig& config() const { return config_; }
    sim::Kernel& kernel() { return kernel_; }

    // Every replica's applied ledger is a prefix of the committed record.
    bool prefix_consistent() const;
    std::uint64_t safety_violations() const { return safety_violations_; }
    std::uint64_t leaders_in_term_violations() const { return term_violations_; }

    // Used by replicas.
    template <class Msg>
    void send(std::size_t from, std::size_t to, Msg msg);
    void on_applied(std::size_t node, const LedgerEntry& entry);
    void on_leader(std::size_t node, std::uint64_t term);
    void reply_committed(TxId tx, std::uint64_t seq);

private:
    struct Request {
        std::uint64_t id;
        AcceptedFn on_accepted;
        DoneFn on_done;
        sim::EventHandle timeout;
        bool accepted = false;
    };

    void finish(TxId tx, std::uint64_t request, SubmitResult result);
    double latency();

    sim::Kernel& kernel_;
    ClusterConfig config_;
    sim::RngStream& net_rng_;
    std::vector<std::unique_ptr<RaftNode>> nodes_;
    std::vector<LedgerEntry> committed_;
    std::map<TxId, std::uint64_t> committed_index_;
    std::map<TxId, std::vector<Request>> pending_;
    std::map<std::uint64_t, std::size_t> term_leader_;
    std::uint64_t next_request_ = 1;
    std::uint64_t safety_violations_ = 0;
    std::uint64_t term_violations_ = 0;
};

template <class Msg>
void Cluster::send(std::size_t from, std::size_t to, Msg msg)
{
    if (nodes_[from]->crashed()) return;
    kernel_.schedule_in(latency(), sim::EventKind::Delivery, [this, to, msg = std::move(msg)] {
        if (!nodes_[to]->crashed()) nodes_[to]->on_message(msg);
    });
}

} // namespace xchain::connector
