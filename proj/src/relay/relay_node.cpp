#include "xchain/relay/relay_node.hpp"

#include <algorithm>

namespace xchain::relay {

RelayNode::RelayNode(RelayId id, chain::Chain& chain, connector::Cluster& cluster,
                     finality::FinalityService& finality, sentinel::Sentinel& sentinel, AuditLog& audit,
                     RelayHooks hooks, RelayConfig config)
    : id_(id),
      chain_(chain),
      cluster_(cluster),
      finality_(finality),
      sentinel_(sentinel),
      audit_(audit),
      hooks_(std::move(hooks)),
      config_(config),
      node_(chain.add_observer(this)),
      jitter_(chain.kernel().rng_stream(chain.name() + ".relay" + std::to_string(id) + ".retry"))
{
    stats_.chain = chain.id();
}

void RelayNode::start()
{
    if (started_) return;
    started_ = true;
    schedule_periodic(config_.poll_period, &RelayNode::poll_tick);
    schedule_periodic(config_.stats_period, &RelayNode::stats_tick);
}

void RelayNode::schedule_periodic(double period, void (RelayNode::*fn)())
{
    const std::uint64_t ep = epoch_;
    chain_.kernel().schedule_in(period, sim::EventKind::Timer, [this, ep, period, fn] {
        if (ep != epoch_ || crashed_) return;
        (this->*fn)();
        schedule_periodic(period, fn);
    });
}

void RelayNode::crash()
{
    if (crashed_) return;
    crashed_ = true;
    ++epoch_;
    chain_.set_silent(node_, true);
    transfers_.clear();
    messages_.clear();
    offset_ = 0;
}

void RelayNode::recover()
{
    if (!crashed_) return;
    crashed_ = false;
    ++epoch_;
    chain_.set_silent(node_, false);
    // The block store survives; pending transfers are rebuilt from it.
    const auto& best = store().best_chain();
    for (BlockId id : best) observe(store().get(id));
    on_tip_change(chain::TipChange{});
    if (started_) {
        schedule_periodic(config_.poll_period, &RelayNode::poll_tick);
        schedule_periodic(config_.stats_period, &RelayNode::stats_tick);
    }
}

void RelayNode::transition(PendingTransfer& t, TransferState to)
{
    if (!legal_transition(t.state, to) && hooks_.on_violation) {
        hooks_.on_violation(std::string("illegal transfer transition ") + to_string(t.state) + " -> " +
                            to_string(to) + " for tx " + std::to_string(t.tx->id));
    }
    if (to == TransferState::Matured && (!t.z || t.depth < *t.z) && hooks_.on_violation) {
        hooks_.on_violation("safety gate: tx " + std::to_string(t.tx->id) + " matured below required depth");
    }
    audit_.record(AuditRecord{chain_.kernel().now(), id_, chain_.id(), t.tx->id, t.state, to, t.depth, t.z});
    t.state = to;
}

void RelayNode::observe(const chain::BlockPtr& block)
{
    const sim::Time now = chain_.kernel().now();
    for (const auto& tx : block->txs) {
        if (tx->kind != chain::TxKind::Inter || tx->source != chain_.id()) continue;
        auto it = transfers_.find(tx->id);
        if (it == transfers_.end()) {
            PendingTransfer t;
            t.tx = tx;
            t.origin = block->id;
            t.observed_at = now;
            if (const auto* e = finality_.table().lookup(tx->source, tx->dest); e && e->usable()) t.z = e->z;
            audit_.record(AuditRecord{now, id_, chain_.id(), tx->id, std::nullopt, TransferState::Observed, 0, t.z});
            auto& stored = transfers_.emplace(tx->id, std::move(t)).first->second;
            if (sentinel_.breaker().open) transition(stored, TransferState::Dropped);
            continue;
        }
        if (it->second.origin == kNoBlock && it->second.state != TransferState::Dropped) {
            it->second.origin = block->id;
            it->second.depth = 0;
        }
    }
}

void RelayNode::on_tip_change(const chain::TipChange& change)
{
    if (crashed_) return;
    const sim::Time now = chain_.kernel().now();
    for (const auto& b : change.pruned) {
        for (const auto& tx : b->txs) {
            auto it = transfers_.find(tx->id);
            if (it == transfers_.end() || it->second.origin != b->id) continue;
            PendingTransfer& t = it->second;
            t.origin = kNoBlock;
            t.depth = 0;
            if (t.state == TransferState::Observed) {
                transition(t, TransferState::Observed);
            } else if (t.state != TransferState::Dropped && hooks_.on_reversal) {
                hooks_.on_reversal(tx->id, now);
            }
        }
    }
    const bool monitor = monitoring();
    for (const auto& b : change.added) {
        observe(b);
        if (monitor) sentinel_.record_growth(b->miner, now);
    }
    for (auto& [id, t] : transfers_) {
        if (t.state != TransferState::Observed || t.origin == kNoBlock) continue;
        t.depth = store().depth(t.origin).value_or(0);
    }
    mature_and_submit();
}

void RelayNode::on_block_received(const chain::BlockPtr& block, sim::Time at)
{
    ++received_blocks_;
    if (monitoring()) sentinel_.record_block(*block, at);
}

void RelayNode::on_message(NodeId from, chain::MessageKind)
{
    ++messages_[from];
    if (monitoring()) sentinel_.record_message(from, chain_.kernel().now());
}

void RelayNode::mature_and_submit()
{
    if (crashed_) return;
    for (auto& [id, t] : transfers_) {
        if (t.state != TransferState::Observed || t.origin == kNoBlock) continue;
        if (!t.z) {
            // Table was not ready at observation; the first usable entry is the snapshot.
            if (const auto* e = finality_.table().lookup(t.tx->source, t.tx->dest); e && e->usable()) t.z = e->z;
            if (!t.z) continue;
        }
        if (t.depth < *t.z) continue;
        if (sentinel_.breaker().open) {
            transition(t, TransferState::Dropped);
            continue;
        }
        transition(t, TransferState::Matured);
        submit(id);
    }
}

void RelayNode::submit(TxId id)
{
    auto& t = transfers_.at(id);
    t.in_flight = true;
    connector::InterChainTx ictx{id, t.tx->source, t.tx->dest, t.tx->payload, t.origin, chain_.kernel().now()};
    const std::uint64_t ep = epoch_;
    cluster_.submit(
        ictx,
        [this, id, ep] {
            if (ep != epoch_) return;
            auto it = transfers_.find(id);
            if (it != transfers_.end() && it->second.state == TransferState::Matured) {
                transition(it->second, TransferState::Submitted);
            }
        },
        [this, id, ep](connector::SubmitResult r) {
            if (ep != epoch_) return;
            auto it = transfers_.find(id);
            if (it == transfers_.end()) return;
            PendingTransfer& t = it->second;
            t.in_flight = false;
            if (r.status == connector::SubmitStatus::Committed) {
                if (t.state == TransferState::Matured) transition(t, TransferState::Submitted);
                if (t.state == TransferState::Submitted) transition(t, TransferState::Committed);
                return;
            }
            if (t.state == TransferState::Matured || t.state == TransferState::Submitted) schedule_retry(id);
        });
}

void RelayNode::schedule_retry(TxId id)
{
    auto& t = transfers_.at(id);
    t.backoff = t.backoff <= 0.0 ? config_.retry_initial : std::min(config_.retry_cap, 2.0 * t.backoff);
    const double delay = std::min(config_.retry_cap, t.backoff * jitter_.uniform(0.75, 1.25));
    const std::uint64_t ep = epoch_;
    chain_.kernel().schedule_in(delay, sim::EventKind::Timer, [this, id, ep] {
        if (ep != epoch_ || crashed_) return;
        auto it = transfers_.find(id);
        if (it == transfers_.end() || it->second.in_flight) return;
        PendingTransfer& t = it->second;
        if (t.state == TransferState::Matured && sentinel_.breaker().open) {
            transition(t, TransferState::Dropped);
        } else if (t.state == TransferState::Matured || t.state == TransferState::Submitted) {
            submit(id);
        }
    });
}

void RelayNode::poll_ledger_and_deliver()
{
    if (crashed_) return;
    const sim::Time now = chain_.kernel().now();
    for (const auto& e : cluster_.read_from(offset_ + 1)) {
        offset_ = e.seq;
        if (e.tx.source == chain_.id()) {
            // A sibling may have committed it first.
            auto it = transfers_.find(e.tx.id);
            if (it != transfers_.end() && !it->second.in_flight) {
                if (it->second.state == TransferState::Matured) transition(it->second, TransferState::Submitted);
                if (it->second.state == TransferState::Submitted) transition(it->second, TransferState::Committed);
            }
        }
        if (e.tx.dest != chain_.id()) continue;
        auto tx = chain::make_tx(e.tx.id, e.tx.source, e.tx.dest, e.tx.payload, now);
        if (chain_.submit_tx(tx, node_) != chain::SubmitResult::Accepted) continue;
        ++injections_;
        audit_.record(AuditRecord{now, id_, chain_.id(), e.tx.id, TransferState::Committed, TransferState::Delivered,
                                  0, std::nullopt});
        if (hooks_.on_delivered) hooks_.on_delivered(e, now);
    }
}

NetworkStats RelayNode::report_stats()
{
    const sim::Time now = chain_.kernel().now();
    const auto& best = store().best_chain();
    const std::size_t n = std::min(config_.stats_window + 1, best.size());
    NetworkStats s;
    s.chain = chain_.id();
    s.q_est = sentinel_.q_est();
    s.messages = messages_;
    s.window_end = now;
    const std::size_t total = store().size();
    s.stale_rate = total > 1 ? static_cast<double>(total - best.size()) / static_cast<double>(total - 1) : 0.0;
    if (n >= 2) {
        const double first = store().get(best[best.size() - n])->timestamp;
        const double last = store().get(best.back())->timestamp;
        s.window_start = first;
        if (last > first) {
            s.t_hat = (last - first) / static_cast<double>(n - 1);
            s.warming_up = false;
        }
    }
    if (!s.warming_up) finality_.push_stats(chain_.id(), finality::FinalityInputs{s.q_est, s.t_hat});
    stats_ = s;
    return s;
}

sentinel::SweepReport RelayNode::sweep()
{
    if (crashed_) return {};
    const sim::Time now = chain_.kernel().now();
    const std::uint64_t ep = epoch_;
    for (NodeId m = 0; m < chain_.miner_count(); ++m) {
        sentinel_.record_ping(m, now);
        chain_.ping(node_, m, [this, ep](const chain::HeartbeatReply& reply) {
            if (ep != epoch_ || crashed_) return;
            sentinel_.record_reply(reply, chain_.kernel().now());
        });
    }
    return sentinel_.sweep(now);
}

void RelayNode::drop_pending()
{
    if (crashed_) return;
    for (auto& [id, t] : transfers_) {
        if (t.state == TransferState::Observed || t.state == TransferState::Matured) {
            transition(t, TransferState::Dropped);
        }
    }
}

} // namespace xchain::relay
