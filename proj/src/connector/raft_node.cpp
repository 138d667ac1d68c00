#include "xchain/connector/raft_node.hpp"

#include "xchain/connector/cluster.hpp"

#include <algorithm>

namespace xchain::connector {

const char* to_string(Role r)
{
    switch (r) {
    case Role::Follower: return "follower";
    case Role::Candidate: return "candidate";
    case Role::Leader: return "leader";
    }
    return "unknown";
}

RaftNode::RaftNode(Cluster& cluster, std::size_t id, sim::RngStream& election_rng)
    : cluster_(cluster), id_(id), rng_(election_rng)
{
    log_.push_back(LogEntry{0, std::nullopt});
}

std::optional<std::uint64_t> RaftNode::applied_seq(TxId tx) const
{
    auto it = applied_.find(tx);
    if (it == applied_.end()) return std::nullopt;
    return it->second;
}

void RaftNode::start() { reset_election_timer(); }

void RaftNode::crash()
{
    crashed_ = true;
    ++epoch_;
    cluster_.kernel().cancel(election_timer_);
    cluster_.kernel().cancel(heartbeat_timer_);
    role_ = Role::Follower;
    commit_index_ = 0;
    last_applied_ = 0;
    ledger_.clear();
    applied_.clear();
    votes_.clear();
    next_index_.clear();
    match_index_.clear();
}

void RaftNode::recover()
{
    if (!crashed_) return;
    crashed_ = false;
    ++epoch_;
    reset_election_timer();
}

void RaftNode::reset_election_timer()
{
    auto& k = cluster_.kernel();
    k.cancel(election_timer_);
    const auto& cfg = cluster_.config();
    const double wait = rng_.uniform(cfg.election_timeout_min, cfg.election_timeout_max);
    const std::uint64_t epoch = epoch_;
    election_timer_ = k.schedule_in(wait, sim::EventKind::Timer, [this, epoch] {
        if (crashed_ || epoch != epoch_ || role_ == Role::Leader) return;
        start_election();
    });
}

void RaftNode::start_election()
{
    ++term_;
    role_ = Role::Candidate;
    voted_for_ = id_;
    votes_.clear();
    votes_.insert(id_);
    reset_election_timer();
    if (votes_.size() * 2 > cluster_.size()) {
        become_leader();
        return;
    }
    for (std::size_t peer = 0; peer < cluster_.size(); ++peer) {
        if (peer == id_) continue;
        cluster_.send(id_, peer, RequestVote{term_, id_, last_index(), term_at(last_index())});
    }
}

void RaftNode::become_follower(std::uint64_t term)
{
    if (term > term_) {
        term_ = term;
        voted_for_.reset();
    }
    if (role_ == Role::Leader) cluster_.kernel().cancel(heartbeat_timer_);
    role_ = Role::Follower;
}

void RaftNode::become_leader()
{
    role_ = Role::Leader;
    cluster_.kernel().cancel(election_timer_);
    next_index_.assign(cluster_.size(), last_index() + 1);
    match_index_.assign(cluster_.size(), 0);
    match_index_[id_] = last_index();
    cluster_.on_leader(id_, term_);
    // A no-op from the new term lets earlier entries commit.
    append_entry(LogEntry{term_, std::nullopt});
    match_index_[id_] = last_index();
    broadcast_append();
    schedule_heartbeat();
    advance_commit();
}

void RaftNode::schedule_heartbeat()
{
    const std::uint64_t epoch = epoch_;
    heartbeat_timer_ = cluster_.kernel().schedule_in(
        cluster_.config().heartbeat_interval, sim::EventKind::Timer, [this, epoch] {
            if (crashed_ || epoch != epoch_ || role_ != Role::Leader) return;
            broadcast_append();
            schedule_heartbeat();
        });
}

void RaftNode::broadcast_append()
{
    for (std::size_t peer = 0; peer < cluster_.size(); ++peer) {
        if (peer != id_) send_append(peer);
    }
}

void RaftNode::send_append(std::size_t peer)
{
    AppendEntries m;
    m.term = term_;
    m.leader = id_;
    m.prev_index = next_index_[peer] - 1;
    m.prev_term = term_at(m.prev_index);
    const std::uint64_t end = std::min<std::uint64_t>(last_index() + 1, next_index_[peer] + cluster_.config().max_batch);
    for (std::uint64_t i = next_index_[peer]; i < end; ++i) m.entries.push_back(log_[i]);
    m.leader_commit = commit_index_;
    cluster_.send(id_, peer, std::move(m));
}

void RaftNode::append_entry(LogEntry e)
{
    if (e.tx) ++in_log_[e.tx->id];
    log_.push_back(std::move(e));
}

void RaftNode::truncate_from(std::uint64_t index)
{
    for (std::uint64_t i = index; i < log_.size(); ++i) {
        if (!log_[i].tx) continue;
        auto it = in_log_.find(log_[i].tx->id);
        if (it != in_log_.end() && --it->second == 0) in_log_.erase(it);
    }
    log_.resize(index);
}

std::optional<std::uint64_t> RaftNode::propose(const InterChainTx& tx)
{
    if (auto seq = applied_seq(tx.id)) return seq;
    if (!in_log_.count(tx.id)) {
        append_entry(LogEntry{term_, tx});
        match_index_[id_] = last_index();
        broadcast_append();
        advance_commit();
    }
    return std::nullopt;
}

void RaftNode::on_message(const RequestVote& m)
{
    if (m.term > term_) become_follower(m.term);
    bool grant = false;
    if (m.term == term_ && (!voted_for_ || *voted_for_ == m.candidate)) {
        const std::uint64_t my_last_term = term_at(last_index());
        const bool up_to_date = m.last_log_term > my_last_term ||
                                (m.last_log_term == my_last_term && m.last_log_index >= last_index());
        if (up_to_date) {
            grant = true;
            voted_for_ = m.candidate;
            reset_election_timer();
        }
    }
    cluster_.send(id_, m.candidate, VoteReply{term_, id_, grant});
}

void RaftNode::on_message(const VoteReply& m)
{
    if (m.term > term_) {
        become_follower(m.term);
        reset_election_timer();
        return;
    }
    if (role_ != Role::Candidate || m.term != term_ || !m.granted) return;
    votes_.insert(m.voter);
    if (votes_.size() * 2 > cluster_.size()) become_leader();
}

void RaftNode::on_message(const AppendEntries& m)
{
    if (m.term < term_) {
        cluster_.send(id_, m.leader, AppendReply{term_, id_, false, 0});
        return;
    }
    if (m.term > term_ || role_ != Role::Follower) become_follower(m.term);
    reset_election_timer();

    if (m.prev_index > last_index() || term_at(m.prev_index) != m.prev_term) {
        cluster_.send(id_, m.leader, AppendReply{term_, id_, false, std::min(m.prev_index, last_index() + 1)});
        return;
    }
    std::uint64_t index = m.prev_index;
    for (const auto& e : m.entries) {
        ++index;
        if (index <= last_index()) {
            if (term_at(index) == e.term) continue;
            truncate_from(index);
        }
        append_entry(e);
    }
    const std::uint64_t match = m.prev_index + m.entries.size();
    if (m.leader_commit > commit_index_) {
        commit_index_ = std::min(m.leader_commit, match);
        apply_committed();
    }
    cluster_.send(id_, m.leader, AppendReply{term_, id_, true, match});
}

void RaftNode::on_message(const AppendReply& m)
{
    if (m.term > term_) {
        become_follower(m.term);
        reset_election_timer();
        return;
    }
    if (role_ != Role::Leader || m.term != term_) return;
    if (m.success) {
        match_index_[m.follower] = std::max(match_index_[m.follower], m.match_index);
        next_index_[m.follower] = match_index_[m.follower] + 1;
        advance_commit();
        if (next_index_[m.follower] <= last_index()) send_append(m.follower);
    } else {
        // Back off; the hint is the follower's first missing index.
        const std::uint64_t hint = std::max<std::uint64_t>(1, m.match_index);
        next_index_[m.follower] = std::max<std::uint64_t>(1, std::min(next_index_[m.follower] - 1, hint));
        send_append(m.follower);
    }
}

void RaftNode::advance_commit()
{
    if (role_ != Role::Leader) return;
    std::vector<std::uint64_t> matches = match_index_;
    std::sort(matches.begin(), matches.end(), std::greater<>());
    const std::uint64_t majority_match = matches[cluster_.size() / 2];
    if (majority_match > commit_index_ && term_at(majority_match) == term_) {
        commit_index_ = majority_match;
        apply_committed();
    }
}

void RaftNode::apply_committed()
{
    while (last_applied_ < commit_index_) {
        ++last_applied_;
        const auto& e = log_[last_applied_];
        if (!e.tx) continue;
        auto existing = applied_.find(e.tx->id);
        if (existing != applied_.end()) {
            // Duplicate proposal: the ledger keeps the first commit only.
            if (role_ == Role::Leader) cluster_.reply_committed(e.tx->id, existing->second);
            continue;
        }
        LedgerEntry entry{ledger_.size() + 1, *e.tx, cluster_.kernel().now()};
        applied_.emplace(e.tx->id, entry.seq);
        ledger_.push_back(entry);
        cluster_.on_applied(id_, entry);
        if (role_ == Role::Leader) cluster_.reply_committed(e.tx->id, entry.seq);
    }
}

} // namespace xchain::connector
