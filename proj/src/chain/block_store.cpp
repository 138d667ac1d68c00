#include "xchain/chain/block_store.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace xchain::chain {

TxPtr make_tx(TxId id, ChainId source, ChainId dest, std::string payload, sim::Time created,
              std::optional<TxId> conflicts_with)
{
    auto tx = std::make_shared<Tx>();
    tx->id = id;
    tx->kind = source == dest ? TxKind::Intra : TxKind::Inter;
    tx->source = source;
    tx->dest = dest;
    tx->payload = std::move(payload);
    tx->created = created;
    tx->conflicts_with = conflicts_with;
    return tx;
}

void validate(const ChainSpec& spec)
{
    if (spec.shares.empty()) throw SpecError("chain '" + spec.name + "' has no miners");
    double sum = 0.0;
    for (double s : spec.shares) {
        if (!(s >= 0.0 && s <= 1.0)) {
            throw SpecError("chain '" + spec.name + "': share " + std::to_string(s) +
                            " outside [0,1]");
        }
        sum += s;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw SpecError("chain '" + spec.name + "': shares sum to " + std::to_string(sum) +
                        ", expected 1");
    }
    if (!(spec.block_interval > 0.0)) {
        throw SpecError("chain '" + spec.name + "': block interval must be positive");
    }
    if (spec.block_capacity == 0) throw SpecError("chain '" + spec.name + "': zero block capacity");
    const auto& lat = spec.latency;
    if (lat.a < 0.0 || (lat.model == LatencyModel::Uniform && lat.b < lat.a)) {
        throw SpecError("chain '" + spec.name + "': invalid latency range");
    }
}

BlockStore::BlockStore(BlockPtr genesis, bool index_txs) : index_txs_(index_txs)
{
    if (!genesis || !genesis->is_genesis() || genesis->height != 0) {
        throw std::invalid_argument("BlockStore requires a genesis block at height 0");
    }
    const BlockId id = genesis->id;
    blocks_.emplace(id, Meta{std::move(genesis), 0.0, next_seq_++});
    best_.push_back(id);
}

const BlockStore::Meta& BlockStore::meta(BlockId id) const
{
    auto it = blocks_.find(id);
    if (it == blocks_.end()) throw UnknownBlock("unknown block " + std::to_string(id));
    return it->second;
}

const BlockPtr& BlockStore::get(BlockId id) const { return meta(id).block; }

bool BlockStore::better(const Meta& a, const Meta& b) const
{
    if (a.block->height != b.block->height) return a.block->height > b.block->height;
    if (a.arrival != b.arrival) return a.arrival < b.arrival;
    return a.arrival_seq < b.arrival_seq;
}

void BlockStore::connect(BlockPtr block, sim::Time arrival, std::uint64_t seq,
                         std::vector<BlockPtr>& out)
{
    // Breadth-first: connecting one block may unlock buffered descendants.
    std::vector<Orphan> work{Orphan{std::move(block), arrival, seq}};
    while (!work.empty()) {
        Orphan o = std::move(work.back());
        work.pop_back();
        const BlockId id = o.block->id;
        blocks_.emplace(id, Meta{o.block, o.arrival, o.seq});
        out.push_back(o.block);
        auto it = orphans_by_parent_.find(id);
        if (it != orphans_by_parent_.end()) {
            for (auto& child : it->second) {
                orphan_ids_.erase(child.block->id);
                work.push_back(std::move(child));
            }
            orphans_by_parent_.erase(it);
        }
    }
}

AddOutcome BlockStore::add(BlockPtr block, sim::Time arrival)
{
    AddOutcome result;
    if (!block) throw std::invalid_argument("null block");
    const BlockId id = block->id;
    if (blocks_.count(id) || orphan_ids_.count(id)) {
        result.status = AddStatus::Duplicate;
        return result;
    }
    if (block->is_genesis()) throw std::invalid_argument("second genesis block");
    const std::uint64_t seq = next_seq_++;
    auto parent_it = blocks_.find(block->parent);
    if (parent_it == blocks_.end()) {
        orphan_ids_.emplace(id, block->parent);
        orphans_by_parent_[block->parent].push_back(Orphan{std::move(block), arrival, seq});
        result.status = AddStatus::Orphaned;
        return result;
    }
    const auto& parent = *parent_it->second.block;
    if (block->height != parent.height + 1) {
        throw std::invalid_argument("block " + std::to_string(id) + " height does not follow parent");
    }
    connect(std::move(block), arrival, seq, result.connected);
    result.status = AddStatus::Connected;

    const Meta* best = &meta(best_tip());
    const Meta* candidate = best;
    for (const auto& b : result.connected) {
        const Meta& m = meta(b->id);
        if (better(m, *candidate)) candidate = &m;
    }
    if (candidate != best) result.tip_change = switch_tip(candidate->block->id);
    return result;
}

TipChange BlockStore::switch_tip(BlockId new_tip)
{
    TipChange change;
    change.old_tip = best_tip();
    change.new_tip = new_tip;

    std::vector<BlockPtr> added;
    BlockId cursor = new_tip;
    while (true) {
        const BlockPtr& b = get(cursor);
        if (b->height < best_.size() && best_[b->height] == cursor) break;
        added.push_back(b);
        cursor = b->parent;
    }
    const std::uint64_t fork_height = get(cursor)->height;
    change.fork_point = cursor;
    for (std::uint64_t h = fork_height + 1; h < best_.size(); ++h) {
        change.pruned.push_back(get(best_[h]));
    }
    std::reverse(added.begin(), added.end());
    change.added = std::move(added);

    if (index_txs_) {
        for (auto it = change.pruned.rbegin(); it != change.pruned.rend(); ++it) index_block(**it, false);
    }
    best_.resize(fork_height + 1);
    for (const auto& b : change.added) {
        best_.push_back(b->id);
        if (index_txs_) index_block(*b, true);
    }
    return change;
}

void BlockStore::index_block(const Block& b, bool add)
{
    for (const auto& tx : b.txs) {
        if (add) {
            tx_index_[tx->id] = b.id;
            if (tx->conflicts_with) ++conflicted_[*tx->conflicts_with];
        } else {
            auto it = tx_index_.find(tx->id);
            if (it != tx_index_.end() && it->second == b.id) tx_index_.erase(it);
            if (tx->conflicts_with) {
                auto c = conflicted_.find(*tx->conflicts_with);
                if (c != conflicted_.end() && --c->second == 0) conflicted_.erase(c);
            }
        }
    }
}

std::optional<std::uint64_t> BlockStore::depth(BlockId id) const
{
    const Block& b = *get(id);
    if (b.height < best_.size() && best_[b.height] == id) return best_height() - b.height;
    return std::nullopt;
}

bool BlockStore::on_best_chain(BlockId id) const
{
    auto it = blocks_.find(id);
    if (it == blocks_.end()) return false;
    const auto h = it->second.block->height;
    return h < best_.size() && best_[h] == id;
}

BlockId BlockStore::fork_choice() const
{
    const Meta* best = nullptr;
    for (const auto& [id, m] : blocks_) {
        if (!best || better(m, *best)) best = &m;
    }
    return best->block->id;
}

std::vector<BlockId> BlockStore::missing_parents() const
{
    std::vector<BlockId> out;
    for (const auto& [parent, children] : orphans_by_parent_) {
        if (!orphan_ids_.count(parent)) out.push_back(parent);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::optional<BlockId> BlockStore::locate_tx(TxId tx) const
{
    auto it = tx_index_.find(tx);
    if (it == tx_index_.end()) return std::nullopt;
    return it->second;
}

BlockId BlockStore::missing_ancestor(BlockId parent) const
{
    for (auto it = orphan_ids_.find(parent); it != orphan_ids_.end(); it = orphan_ids_.find(parent)) {
        parent = it->second;
    }
    return parent;
}

bool BlockStore::is_conflicted(TxId tx) const { return conflicted_.count(tx) != 0; }

} // namespace xchain::chain
