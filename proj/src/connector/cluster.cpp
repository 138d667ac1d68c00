#include "xchain/connector/cluster.hpp"

#include <string>

namespace xchain::connector {

Cluster::Cluster(sim::Kernel& kernel, ClusterConfig config)
    : kernel_(kernel), config_(config), net_rng_(kernel.rng_stream("connector.net"))
{
    if (config_.nodes == 0) throw std::invalid_argument("connector cluster needs at least one node");
    for (std::size_t i = 0; i < config_.nodes; ++i) {
        auto& rng = kernel_.rng_stream("connector.node" + std::to_string(i) + ".election");
        nodes_.push_back(std::make_unique<RaftNode>(*this, i, rng));
    }
}

void Cluster::start()
{
    for (auto& n : nodes_) n->start();
}

double Cluster::latency() { return net_rng_.uniform(config_.latency_min, config_.latency_max); }

std::optional<std::size_t> Cluster::leader() const
{
    std::optional<std::size_t> best;
    for (const auto& n : nodes_) {
        if (n->crashed() || n->role() != Role::Leader) continue;
        if (!best || n->term() > nodes_[*best]->term()) best = n->id();
    }
    return best;
}

std::size_t Cluster::live_count() const
{
    std::size_t live = 0;
    for (const auto& n : nodes_) live += n->crashed() ? 0 : 1;
    return live;
}

void Cluster::submit(const InterChainTx& tx, AcceptedFn on_accepted, DoneFn on_done)
{
    const std::uint64_t rid = next_request_++;
    const TxId id = tx.id;
    auto timeout = kernel_.schedule_in(config_.client_timeout, sim::EventKind::Timer, [this, id, rid] {
        finish(id, rid, SubmitResult{SubmitStatus::Timeout, 0});
    });
    pending_[id].push_back(Request{rid, std::move(on_accepted), std::move(on_done), timeout});

    auto target = leader();
    if (!target) return; // no leader: the client times out and retries
    const std::size_t to = *target;
    kernel_.schedule_in(latency(), sim::EventKind::Delivery, [this, to, tx, rid] {
        RaftNode& n = *nodes_[to];
        if (n.crashed() || n.role() != Role::Leader) return;
        if (auto seq = n.propose(tx)) {
            reply_committed(tx.id, *seq);
            return;
        }
        kernel_.schedule_in(latency(), sim::EventKind::Delivery, [this, id = tx.id, rid] {
            auto it = pending_.find(id);
            if (it == pending_.end()) return;
            for (auto& r : it->second) {
                if (r.id == rid && !r.accepted) {
                    r.accepted = true;
                    if (r.on_accepted) r.on_accepted();
                }
            }
        });
    });
}

void Cluster::reply_committed(TxId tx, std::uint64_t seq)
{
    auto it = pending_.find(tx);
    if (it == pending_.end()) return;
    std::vector<std::uint64_t> ids;
    for (const auto& r : it->second) ids.push_back(r.id);
    const double delay = latency();
    for (std::uint64_t rid : ids) {
        kernel_.schedule_in(delay, sim::EventKind::Delivery, [this, tx, rid, seq] {
            finish(tx, rid, SubmitResult{SubmitStatus::Committed, seq});
        });
    }
}

void Cluster::finish(TxId tx, std::uint64_t request, SubmitResult result)
{
    auto it = pending_.find(tx);
    if (it == pending_.end()) return;
    auto& reqs = it->second;
    for (auto r = reqs.begin(); r != reqs.end(); ++r) {
        if (r->id != request) continue;
        Request done = std::move(*r);
        reqs.erase(r);
        if (reqs.empty()) pending_.erase(it);
        kernel_.cancel(done.timeout);
        if (done.on_done) done.on_done(result);
        return;
    }
}

void Cluster::on_applied(std::size_t, const LedgerEntry& entry)
{
    if (entry.seq == committed_.size() + 1) {
        committed_.push_back(entry);
        committed_index_.emplace(entry.tx.id, entry.seq);
    } else if (entry.seq > committed_.size() + 1 || committed_[entry.seq - 1].tx.id != entry.tx.id) {
        ++safety_violations_;
    }
}

void Cluster::on_leader(std::size_t node, std::uint64_t term)
{
    auto [it, fresh] = term_leader_.emplace(term, node);
    if (!fresh && it->second != node) ++term_violations_;
}

std::optional<std::uint64_t> Cluster::lookup(TxId tx) const
{
    auto it = committed_index_.find(tx);
    if (it == committed_index_.end()) return std::nullopt;
    return it->second;
}

std::vector<LedgerEntry> Cluster::read_from(std::uint64_t from) const
{
    const RaftNode* best = nullptr;
    for (const auto& n : nodes_) {
        if (n->crashed()) continue;
        if (!best || n->ledger().size() > best->ledger().size()) best = n.get();
    }
    std::vector<LedgerEntry> out;
    if (!best || from == 0) return out;
    const auto& ledger = best->ledger();
    for (std::uint64_t s = from; s <= ledger.size(); ++s) out.push_back(ledger[s - 1]);
    return out;
}

void Cluster::crash(std::size_t node) { nodes_.at(node)->crash(); }
void Cluster::recover(std::size_t node) { nodes_.at(node)->recover(); }

bool Cluster::prefix_consistent() const
{
    if (safety_violations_ != 0) return false;
    for (const auto& n : nodes_) {
        const auto& ledger = n->ledger();
        if (ledger.size() > committed_.size()) return false;
        for (std::size_t i = 0; i < ledger.size(); ++i) {
            if (ledger[i].seq != committed_[i].seq || ledger[i].tx.id != committed_[i].tx.id) return false;
        }
    }
    return true;
}

} // namespace xchain::connector
