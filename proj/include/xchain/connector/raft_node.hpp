#pragma once

#include "xchain/connector/types.hpp"

#include <optional>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace xchain::connector {

class Cluster;

enum class Role : std::uint8_t { Follower, Candidate, Leader };
const char* to_string(Role r);

struct LogEntry {
    std::uint64_t term = 0;
    std::optional<InterChainTx> tx; // empty: leader no-op
};

struct RequestVote {
    std::uint64_t term;
    std::size_t candidate;
    std::uint64_t last_log_index;
    std::uint64_t last_log_term;
};
struct VoteReply {
    std::uint64_t term;
    std::size_t voter;
    bool granted;
};
struct AppendEntries {
    std::uint64_t term;
    std::size_t leader;
    std::uint64_t prev_index;
    std::uint64_t prev_term;
    std::vector<LogEntry> entries;
    std::uint64_t leader_commit;
};
struct AppendReply {
    std::uint64_t term;
    std::size_t follower;
    bool success;
    std::uint64_t match_index;
};

// One replica of the connector's Raft-style replicated log. The term, vote
// and log survive a crash; everything else is rebuilt on recovery.
class RaftNode {
public:
    RaftNode(Cluster& cluster, std::size_t id, sim::RngStream& election_rng);

    std::size_t id() const { return id_; }
    Role role() const { return role_; }
    std::uint64_t term() const { return term_; }
    std::uint64_t commit_index() const { return commit_index_; }
    std::uint64_t last_index() const { return log_.size() - 1; }
    bool crashed() const { return crashed_; }
    const std::vector<LogEntry>& log() const { return log_; }
    const std::vector<LedgerEntry>& ledger() const { return ledger_; }
    std::optional<std::uint64_t> applied_seq(TxId tx) const;

    void start();
    void crash();
    void recover();

    // Client entry point on the leader. Returns the existing seq when the tx
    // is already applied; otherwise appends it (once) and replicates.
    std::optional<std::uint64_t> propose(const InterChainTx& tx);

    void on_message(const RequestVote& m);
    void on_message(const VoteReply& m);
    void on_message(const AppendEntries& m);
    void on_message(const AppendReply& m);

private:
    std::uint64_t term_at(std::uint64_t index) const { return log_[index].term; }
    void reset_election_timer();
    void start_election();
    void become_follower(std::uint64_t term);
    void become_leader();
    void broadcast_append();
    void send_append(std::size_t peer);
    void schedule_heartbeat();
    void advance_commit();
    void apply_committed();
    void truncate_from(std::uint64_t index);
    void append_entry(LogEntry e);

    Cluster& cluster_;
    std::size_t id_;
    sim::RngStream& rng_;

    // persistent
    std::uint64_t term_ = 0;
    std::optional<std::size_t> voted_for_;
    std::vector<LogEntry> log_; // log_[0] is a sentinel

    // volatile
    bool crashed_ = false;
    Role role_ = Role::Follower;
    std::uint64_t commit_index_ = 0;
    std::uint64_t last_applied_ = 0;
    std::vector<LedgerEntry> ledger_;
    std::unordered_map<TxId, std::uint64_t> applied_;
    std::unordered_map<TxId, std::uint32_t> in_log_;
    std::unordered_set<std::size_t> votes_;
    std::vector<std::uint64_t> next_index_;
    std::vector<std::uint64_t> match_index_;
    sim::EventHandle election_timer_;
    sim::EventHandle heartbeat_timer_;
    std::uint64_t epoch_ = 0; // invalidates timers across crashes
};

} // namespace xchain::connector
