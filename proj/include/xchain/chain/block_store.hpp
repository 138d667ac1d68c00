#pragma once

#include "xchain/chain/types.hpp"

#include <optional>
#include <unordered_map>
#include <vector>

namespace xchain::chain {

class UnknownBlock : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

// A best-tip switch. `pruned` and `added` are both in ascending height order;
// `pruned` is empty for a plain extension.
struct TipChange {
    BlockId old_tip = kNoBlock;
    BlockId new_tip = kNoBlock;
    BlockId fork_point = kNoBlock;
    std::vector<BlockPtr> pruned;
    std::vector<BlockPtr> added;

    bool is_reorg() const { return !pruned.empty(); }
};

enum class AddStatus : std::uint8_t { Connected, Orphaned, Duplicate };

struct AddOutcome {
    AddStatus status = AddStatus::Duplicate;
    std::vector<BlockPtr> connected; // this block plus any orphans it unlocked
    std::optional<TipChange> tip_change;
};

// One node's view of a chain: the fork tree, the orphan buffer and the
// longest-chain selection (ties to first arrival, then arrival order).
class BlockStore {
public:
    explicit BlockStore(BlockPtr genesis, bool index_txs = false);

    AddOutcome add(BlockPtr block, sim::Time arrival);

    BlockId best_tip() const { return best_.back(); }
    std::uint64_t best_height() const { return best_.size() - 1; }
    const Block& tip_block() const { return *get(best_tip()); }
    const std::vector<BlockId>& best_chain() const { return best_; }

    bool contains(BlockId id) const { return blocks_.count(id) != 0; }
    bool has_orphan(BlockId id) const { return orphan_ids_.count(id) != 0; }
    const BlockPtr& get(BlockId id) const;

    // Blocks built on top of `id` along the best chain, or nullopt when the
    // block is off the best chain. Throws UnknownBlock for ids never connected.
    std::optional<std::uint64_t> depth(BlockId id) const;
    bool on_best_chain(BlockId id) const;

    // Full recomputation of the selection rule over every connected block.
    BlockId fork_choice() const;

    std::size_t size() const { return blocks_.size(); }
    std::size_t orphan_count() const { return orphan_ids_.size(); }
    // Parents referenced by buffered orphans that have not arrived.
    std::vector<BlockId> missing_parents() const;
    // Walks up through buffered orphans to the first ancestor not held at all.
    BlockId missing_ancestor(BlockId parent) const;

    // Only maintained when constructed with index_txs.
    std::optional<BlockId> locate_tx(TxId tx) const;
    bool is_conflicted(TxId tx) const;

    sim::Time arrival_time(BlockId id) const { return meta(id).arrival; }

private:
    struct Meta {
        BlockPtr block;
        sim::Time arrival;
        std::uint64_t arrival_seq;
    };

    const Meta& meta(BlockId id) const;
    bool better(const Meta& a, const Meta& b) const;
    void connect(BlockPtr block, sim::Time arrival, std::uint64_t seq, std::vector<BlockPtr>& out);
    TipChange switch_tip(BlockId new_tip);
    void index_block(const Block& b, bool add);

    std::unordered_map<BlockId, Meta> blocks_;
    struct Orphan {
        BlockPtr block;
        sim::Time arrival;
        std::uint64_t seq;
    };
    std::unordered_map<BlockId, std::vector<Orphan>> orphans_by_parent_;
    std::unordered_map<BlockId, BlockId> orphan_ids_; // orphan id -> parent id
    std::vector<BlockId> best_;
    std::uint64_t next_seq_ = 0;
    bool index_txs_;
    std::unordered_map<TxId, BlockId> tx_index_;
    std::unordered_map<TxId, std::uint32_t> conflicted_;
};

} // namespace xchain::chain
