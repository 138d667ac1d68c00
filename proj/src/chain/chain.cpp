#include "xchain/chain/chain.hpp"

#include <string>

namespace xchain::chain {

namespace {

BlockPtr make_genesis(ChainId chain)
{
    auto g = std::make_shared<Block>();
    g->id = (static_cast<BlockId>(chain) + 1) << 40;
    g->parent = kNoBlock;
    g->height = 0;
    g->timestamp = 0.0;
    return g;
}

} // namespace

Chain::Chain(sim::Kernel& kernel, ChainSpec spec)
    : kernel_(kernel), spec_(std::move(spec)), genesis_(make_genesis(spec_.id))
{
    validate(spec_);
    gossip_rng_ = &kernel_.rng_stream(spec_.name + ".gossip");
    for (NodeId i = 0; i < spec_.shares.size(); ++i) {
        auto& n = nodes_.emplace_back(i, genesis_);
        n.miner = true;
        n.share = spec_.shares[i];
        mining_rng_.push_back(&kernel_.rng_stream(spec_.name + ".miner" + std::to_string(i)));
    }
}

void Chain::start()
{
    if (started_) return;
    started_ = true;
    for (NodeId i = 0; i < miner_count(); ++i) schedule_mining(i);
}

NodeId Chain::add_observer(ChainObserver* observer)
{
    const NodeId id = static_cast<NodeId>(nodes_.size());
    auto& n = nodes_.emplace_back(id, genesis_);
    n.observer = observer;
    return id;
}

double Chain::draw_latency()
{
    const auto& lat = spec_.latency;
    if (lat.model == LatencyModel::Constant) return lat.a;
    return gossip_rng_->uniform(lat.a, lat.b);
}

void Chain::schedule_mining(NodeId miner)
{
    const double share = nodes_[miner].share;
    if (share <= 0.0) return;
    const double wait = mining_rng_[miner]->exponential(spec_.block_interval / share);
    kernel_.schedule_in(wait, sim::EventKind::Mining, [this, miner] {
        Node& n = nodes_[miner];
        if (!n.silent) {
            if (n.strategy) {
                n.strategy->on_mined(*this, miner);
            } else {
                mine_honest(miner);
            }
        }
        schedule_mining(miner);
    });
}

BlockPtr Chain::make_block(NodeId miner, const BlockPtr& parent, std::vector<TxPtr> txs)
{
    if (!parent) throw UnknownBlock("make_block: null parent");
    const Block* parent_block = parent.get();
    auto b = std::make_shared<Block>();
    b->id = genesis_->id + next_block_++;
    b->parent = parent->id;
    b->height = parent_block->height + 1;
    b->miner = miner;
    // Parent-monotone timestamps.
    b->timestamp = std::max(kernel_.now(), parent_block->timestamp);
    b->txs = std::move(txs);
    mined_.push_back(b);
    return b;
}

std::vector<TxPtr> Chain::assemble(NodeId miner, const std::function<bool(const Tx&)>& extra_skip)
{
    const Node& n = nodes_.at(miner);
    return n.mempool.select(spec_.block_capacity, [&](const Tx& tx) {
        if (n.store.locate_tx(tx.id) || n.store.is_conflicted(tx.id)) return true;
        return extra_skip ? extra_skip(tx) : false;
    });
}

void Chain::mine_honest(NodeId miner)
{
    Node& n = nodes_[miner];
    auto block = make_block(miner, n.store.get(n.store.best_tip()), assemble(miner));
    accept_local(miner, block);
    broadcast_block(miner, block);
}

AddOutcome Chain::accept_local(NodeId node, const BlockPtr& block)
{
    Node& n = nodes_.at(node);
    auto outcome = n.store.add(block, kernel_.now());
    after_add(n, outcome);
    return outcome;
}

void Chain::after_add(Node& n, const AddOutcome& outcome)
{
    if (!outcome.tip_change) return;
    const TipChange& change = *outcome.tip_change;
    if (n.miner) {
        for (const auto& b : change.added) {
            for (const auto& tx : b->txs) {
                n.mempool.erase(tx->id);
                if (tx->conflicts_with) n.mempool.erase(*tx->conflicts_with);
            }
        }
        for (const auto& b : change.pruned) {
            for (const auto& tx : b->txs) {
                if (n.store.locate_tx(tx->id) || n.store.is_conflicted(tx->id)) continue;
                n.mempool.insert(tx);
            }
        }
    }
    if (n.observer && !n.silent) n.observer->on_tip_change(change);
}

SubmitResult Chain::submit_tx(const TxPtr& tx, NodeId entry)
{
    if (!seen_txs_.insert(tx->id).second) return SubmitResult::Duplicate;
    Node& n = nodes_.at(entry);
    if (n.miner && !n.store.locate_tx(tx->id) && !n.store.is_conflicted(tx->id)) {
        n.mempool.insert(tx);
    }
    broadcast_tx(entry, tx);
    return SubmitResult::Accepted;
}

bool Chain::filtered(NodeId from, const Node& to) const
{
    if (to.silent || to.eclipsed) return true;
    return !to.adversarial && blacklist_.count(from) != 0;
}

void Chain::broadcast_block(NodeId origin, const BlockPtr& block)
{
    if (nodes_.at(origin).silent) return;
    published_.insert(block->id);
    for (NodeId peer = 0; peer < nodes_.size(); ++peer) {
        if (peer == origin) continue;
        deliver_block(origin, peer, block);
    }
}

void Chain::deliver_block(NodeId from, NodeId to, BlockPtr block)
{
    kernel_.schedule_in(draw_latency(), sim::EventKind::Delivery,
                        [this, from, to, block = std::move(block)] { handle_block(from, to, block); });
}

void Chain::handle_block(NodeId from, NodeId to, const BlockPtr& block)
{
    Node& n = nodes_[to];
    if (filtered(from, n)) return;
    if (n.observer) n.observer->on_message(from, MessageKind::Block);
    // Honest fork choice ignores blocks mined by blacklisted miners, and
    // everything built on them.
    if (!n.adversarial && (blacklist_.count(block->miner) || n.rejected.count(block->parent))) {
        n.rejected.insert(block->id);
        return;
    }

    auto outcome = n.store.add(block, kernel_.now());
    if (outcome.status == AddStatus::Duplicate) return;
    ++n.blocks_received;
    if (n.observer) n.observer->on_block_received(block, kernel_.now());
    if (outcome.status == AddStatus::Orphaned) {
        const BlockId missing = n.store.missing_ancestor(block->parent);
        if (!n.rejected.count(missing)) request_parent(to, from, missing);
        return;
    }
    after_add(n, outcome);
    if (n.strategy) n.strategy->on_public_blocks(*this, to, outcome);
}

void Chain::request_parent(NodeId requester, NodeId holder, BlockId parent)
{
    // Round trip: request travels to the holder, which answers from its store.
    kernel_.schedule_in(draw_latency(), sim::EventKind::Delivery, [this, requester, holder, parent] {
        Node& h = nodes_[holder];
        if (h.silent || !h.store.contains(parent)) return;
        deliver_block(holder, requester, h.store.get(parent));
    });
}

void Chain::broadcast_tx(NodeId origin, const TxPtr& tx)
{
    if (nodes_.at(origin).silent) return;
    const bool from_observer = nodes_[origin].observer != nullptr;
    for (NodeId peer = 0; peer < nodes_.size(); ++peer) {
        if (peer == origin) continue;
        if (from_observer && !nodes_[peer].miner) continue;
        kernel_.schedule_in(draw_latency(), sim::EventKind::Delivery,
                            [this, origin, peer, tx] { handle_tx(origin, peer, tx); });
    }
}

void Chain::handle_tx(NodeId from, NodeId to, const TxPtr& tx)
{
    Node& n = nodes_[to];
    if (filtered(from, n)) return;
    if (n.observer) n.observer->on_message(from, MessageKind::Tx);
    if (!n.miner) return;
    if (n.store.locate_tx(tx->id) || n.store.is_conflicted(tx->id)) return;
    n.mempool.insert(tx);
}

void Chain::send_junk(NodeId origin)
{
    if (nodes_.at(origin).silent) return;
    ++junk_sent_;
    for (NodeId peer = 0; peer < nodes_.size(); ++peer) {
        if (peer == origin) continue;
        kernel_.schedule_in(draw_latency(), sim::EventKind::Delivery, [this, origin, peer] {
            Node& n = nodes_[peer];
            if (filtered(origin, n)) return;
            if (n.observer) n.observer->on_message(origin, MessageKind::Junk);
        });
    }
}

void Chain::ping(NodeId from, NodeId to, std::function<void(const HeartbeatReply&)> on_reply)
{
    const sim::Time sent = kernel_.now();
    kernel_.schedule_in(draw_latency(), sim::EventKind::Delivery,
                        [this, from, to, sent, on_reply = std::move(on_reply)]() mutable {
                            Node& target = nodes_[to];
                            if (target.silent) return;
                            HeartbeatReply reply{to, sent, kernel_.now(), target.blocks_received,
                                                 target.store.best_height()};
                            kernel_.schedule_in(draw_latency(), sim::EventKind::Delivery,
                                                [this, from, reply, on_reply = std::move(on_reply)] {
                                                    if (nodes_[from].silent) return;
                                                    on_reply(reply);
                                                });
                        });
}

void Chain::set_strategy(NodeId miner, MinerStrategy* strategy) { node_ref(miner).strategy = strategy; }
void Chain::set_eclipsed(NodeId node, bool on) { node_ref(node).eclipsed = on; }
void Chain::set_silent(NodeId node, bool on) { node_ref(node).silent = on; }
void Chain::blacklist(NodeId target) { blacklist_.insert(target); }

} // namespace xchain::chain
