#pragma once

#include "xchain/chain/block_store.hpp"
#include "xchain/chain/mempool.hpp"
#include "xchain/chain/types.hpp"
#include "xchain/sim/kernel.hpp"

#include <deque>
#include <functional>
#include <set>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace xchain::chain {

enum class MessageKind : std::uint8_t { Block, Tx, Junk };

struct HeartbeatReply {
    NodeId node = 0;
    sim::Time sent_at = 0.0;
    sim::Time replied_at = 0.0;
    std::uint64_t blocks_received = 0;
    std::uint64_t best_height = 0;
};

// Callbacks for an attached non-mining full node (a relay).
class ChainObserver {
public:
    virtual ~ChainObserver() = default;
    virtual void on_tip_change(const TipChange&) {}
    // First reception of a block from the network, before fork choice.
    virtual void on_block_received(const BlockPtr&, sim::Time) {}
    // Every delivery that passed the node's filters, keyed by sender.
    virtual void on_message(NodeId, MessageKind) {}
};

class Chain;

// Replaces honest mining for the miners it is installed on.
class MinerStrategy {
public:
    virtual ~MinerStrategy() = default;
    virtual void on_mined(Chain& chain, NodeId miner) = 0;
    // Blocks from peers were connected at a controlled node.
    virtual void on_public_blocks(Chain&, NodeId, const AddOutcome&) {}
};

struct Node {
    NodeId id = 0;
    bool miner = false;
    double share = 0.0;
    BlockStore store;
    Mempool mempool;
    bool silent = false;
    bool eclipsed = false;
    bool adversarial = false; // ignores blacklists
    std::uint64_t blocks_received = 0;
    std::unordered_set<BlockId> rejected; // blacklisted-miner blocks and their descendants
    MinerStrategy* strategy = nullptr;
    ChainObserver* observer = nullptr;

    Node(NodeId id_, BlockPtr genesis) : id(id_), store(std::move(genesis), true) {}
};

enum class SubmitResult : std::uint8_t { Accepted, Duplicate };

// One simulated PoW sub-blockchain: a fully meshed set of miners plus any
// attached observer nodes, exchanging blocks and txs over the kernel.
class Chain {
public:
    Chain(sim::Kernel& kernel, ChainSpec spec);

    Chain(const Chain&) = delete;
    Chain& operator=(const Chain&) = delete;

    const ChainSpec& spec() const { return spec_; }
    ChainId id() const { return spec_.id; }
    const std::string& name() const { return spec_.name; }
    sim::Kernel& kernel() { return kernel_; }
    const BlockPtr& genesis() const { return genesis_; }

    // Schedules each miner's Poisson mining process (rate share / T).
    void start();

    NodeId add_observer(ChainObserver* observer);
    std::size_t node_count() const { return nodes_.size(); }
    std::size_t miner_count() const { return spec_.shares.size(); }
    Node& node(NodeId id) { return nodes_.at(id); }
    const Node& node(NodeId id) const { return nodes_.at(id); }

    // Chain-wide dedup: a tx id may enter this chain once.
    SubmitResult submit_tx(const TxPtr& tx, NodeId entry);
    bool has_seen_tx(TxId id) const { return seen_txs_.count(id) != 0; }

    // Gossip to every connected peer of `origin`.
    void broadcast_block(NodeId origin, const BlockPtr& block);
    void broadcast_tx(NodeId origin, const TxPtr& tx);
    void send_junk(NodeId origin);
    void ping(NodeId from, NodeId to, std::function<void(const HeartbeatReply&)> on_reply);

    // Helpers for mining strategies.
    BlockPtr make_block(NodeId miner, const BlockPtr& parent, std::vector<TxPtr> txs);
    std::vector<TxPtr> assemble(NodeId miner, const std::function<bool(const Tx&)>& extra_skip = {});
    AddOutcome accept_local(NodeId node, const BlockPtr& block);
    void mine_honest(NodeId miner);

    void set_strategy(NodeId miner, MinerStrategy* strategy);
    void set_eclipsed(NodeId node, bool on);
    void set_silent(NodeId node, bool on);
    void set_adversarial(NodeId node, bool on) { node_ref(node).adversarial = on; }
    void blacklist(NodeId target);
    const std::set<NodeId>& blacklisted() const { return blacklist_; }

    double draw_latency();

    // Every block created by any miner (published or not), creation order.
    const std::vector<BlockPtr>& mined_blocks() const { return mined_; }
    bool was_published(BlockId id) const { return published_.count(id) != 0; }
    std::uint64_t junk_sent() const { return junk_sent_; }

private:
    Node& node_ref(NodeId id) { return nodes_.at(id); }
    void schedule_mining(NodeId miner);
    void deliver_block(NodeId from, NodeId to, BlockPtr block);
    void handle_block(NodeId from, NodeId to, const BlockPtr& block);
    void handle_tx(NodeId from, NodeId to, const TxPtr& tx);
    void request_parent(NodeId requester, NodeId holder, BlockId parent);
    bool filtered(NodeId from, const Node& to) const;
    void after_add(Node& n, const AddOutcome& outcome);

    sim::Kernel& kernel_;
    ChainSpec spec_;
    BlockPtr genesis_;
    std::deque<Node> nodes_;
    sim::RngStream* gossip_rng_;
    std::vector<sim::RngStream*> mining_rng_;
    std::unordered_set<TxId> seen_txs_;
    std::set<NodeId> blacklist_;
    std::vector<BlockPtr> mined_;
    std::unordered_set<BlockId> published_;
    std::uint64_t next_block_ = 1;
    std::uint64_t junk_sent_ = 0;
    bool started_ = false;
};

} // namespace xchain::chain
