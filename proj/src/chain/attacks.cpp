#include "xchain/chain/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_set>

namespace xchain::chain {

const char* to_string(AttackKind kind)
{
    switch (kind) {
    case AttackKind::SelfishMining: return "selfish-mining";
    case AttackKind::Eclipse: return "eclipse";
    case AttackKind::Ddos: return "ddos";
    case AttackKind::DoubleSpend: return "double-spend";
    case AttackKind::CrashSilence: return "crash-silence";
    }
    return "unknown";
}

std::optional<AttackKind> parse_attack_kind(std::string_view text)
{
    for (auto k : {AttackKind::SelfishMining, AttackKind::Eclipse, AttackKind::Ddos,
                   AttackKind::DoubleSpend, AttackKind::CrashSilence}) {
        if (text == to_string(k)) return k;
    }
    return std::nullopt;
}

namespace {

// Private-branch bookkeeping shared by the withholding strategies.
class PrivateBranch {
public:
    std::vector<BlockPtr> blocks;
    std::unordered_set<TxId> tx_ids;

    bool empty() const { return blocks.empty(); }
    void push(const BlockPtr& b)
    {
        blocks.push_back(b);
        for (const auto& tx : b->txs) tx_ids.insert(tx->id);
    }
    void clear()
    {
        blocks.clear();
        tx_ids.clear();
    }
};

void publish(Chain& chain, const std::vector<NodeId>& members, PrivateBranch& branch)
{
    for (const auto& b : branch.blocks) {
        for (NodeId m : members) chain.accept_local(m, b);
    }
    for (const auto& b : branch.blocks) {
        NodeId origin = std::find(members.begin(), members.end(), b->miner) != members.end()
                            ? b->miner
                            : members.front();
        chain.broadcast_block(origin, b);
    }
    branch.clear();
}

// Withholds blocks on a private branch and releases the whole branch once
// the public chain comes within one block of it.
class SelfishMining final : public AttackController, public MinerStrategy {
public:
    SelfishMining(Chain& chain, AttackSpec spec) : AttackController(std::move(spec)), chain_(chain) {}

    void arm() override
    {
        auto& k = chain_.kernel();
        k.schedule(spec_.start, sim::EventKind::Harness, [this] {
            for (NodeId m : spec_.nodes) {
                chain_.set_strategy(m, this);
                chain_.set_adversarial(m, true);
            }
        });
        if (std::isfinite(spec_.stop)) {
            k.schedule(spec_.stop, sim::EventKind::Harness, [this] {
                for (NodeId m : spec_.nodes) chain_.set_strategy(m, nullptr);
                branch_.clear();
            });
        }
    }

    void on_mined(Chain& chain, NodeId miner) override
    {
        const NodeId lead = spec_.nodes.front();
        const auto& store = chain.node(lead).store;
        const BlockPtr parent = branch_.empty() ? store.get(store.best_tip()) : branch_.blocks.back();
        auto txs = chain.assemble(lead, [this](const Tx& tx) { return branch_.tx_ids.count(tx.id) != 0; });
        branch_.push(chain.make_block(miner, parent, std::move(txs)));
    }

    void on_public_blocks(Chain& chain, NodeId node, const AddOutcome& outcome) override
    {
        if (node != spec_.nodes.front() || !outcome.tip_change || branch_.empty()) return;
        const auto public_height = static_cast<std::int64_t>(chain.node(node).store.best_height());
        const auto private_height = static_cast<std::int64_t>(branch_.blocks.back()->height);
        const std::int64_t lead = private_height - public_height;
        if (lead < 0) {
            branch_.clear();
        } else if (lead <= 1) {
            publish(chain, spec_.nodes, branch_);
        }
    }

private:
    Chain& chain_;
    PrivateBranch branch_;
};

// Mines a conflicting branch from the block preceding the victim tx and
// publishes it once strictly longer than the public chain.
class DoubleSpend final : public AttackController, public MinerStrategy {
public:
    DoubleSpend(Chain& chain, AttackSpec spec, TxIdAllocator& ids)
        : AttackController(std::move(spec)), chain_(chain), ids_(ids)
    {
    }

    void arm() override
    {
        auto& k = chain_.kernel();
        k.schedule(spec_.start, sim::EventKind::Harness, [this] { begin(); });
        if (std::isfinite(spec_.stop)) {
            k.schedule(spec_.stop, sim::EventKind::Harness, [this] {
                if (active_) finish(false);
            });
        }
    }

    const DoubleSpendOutcome* double_spend() const override { return &outcome_; }

    void on_mined(Chain& chain, NodeId miner) override
    {
        const BlockPtr parent = branch_.empty() ? fork_base_ : branch_.blocks.back();
        std::vector<TxPtr> txs;
        if (branch_.empty()) {
            txs.push_back(make_tx(ids_.next(), chain.id(), chain.id(), "double-spend",
                                  chain.kernel().now(), outcome_.victim));
        }
        branch_.push(chain.make_block(miner, parent, std::move(txs)));
        evaluate(chain);
    }

    void on_public_blocks(Chain& chain, NodeId node, const AddOutcome& outcome) override
    {
        if (node == spec_.nodes.front() && outcome.tip_change) evaluate(chain);
    }

private:
    void begin()
    {
        const NodeId lead = spec_.nodes.front();
        NodeId entry = 0;
        while (std::find(spec_.nodes.begin(), spec_.nodes.end(), entry) != spec_.nodes.end()) ++entry;
        const auto& store = chain_.node(lead).store;
        fork_base_ = store.get(store.best_tip());
        auto victim = make_tx(ids_.next(), chain_.id(), spec_.victim_dest, "victim", chain_.kernel().now());
        outcome_.victim = victim->id;
        chain_.submit_tx(victim, entry);
        active_ = true;
        for (NodeId m : spec_.nodes) chain_.set_strategy(m, this);
    }

    void evaluate(Chain& chain)
    {
        if (!active_) return;
        const auto& store = chain.node(spec_.nodes.front()).store;
        const std::uint64_t public_height = store.best_height();
        const std::uint64_t private_height =
            branch_.empty() ? fork_base_->height : branch_.blocks.back()->height;
        if (private_height > public_height) {
            bool held = spec_.hold_depth == 0;
            if (!held) {
                if (auto where = store.locate_tx(*outcome_.victim)) {
                    held = store.depth(*where).value_or(0) >= spec_.hold_depth;
                }
            }
            if (held) {
                publish(chain, spec_.nodes, branch_);
                finish(true);
                return;
            }
        }
        if (public_height >= private_height + spec_.max_deficit) finish(false);
    }

    void finish(bool published)
    {
        active_ = false;
        outcome_.published = published;
        outcome_.gave_up = !published;
        outcome_.resolved_at = chain_.kernel().now();
        branch_.clear();
        for (NodeId m : spec_.nodes) chain_.set_strategy(m, nullptr);
    }

    Chain& chain_;
    TxIdAllocator& ids_;
    PrivateBranch branch_;
    BlockPtr fork_base_;
    bool active_ = false;
    DoubleSpendOutcome outcome_;
};

class Eclipse final : public AttackController {
public:
    Eclipse(Chain& chain, AttackSpec spec) : AttackController(std::move(spec)), chain_(chain) {}

    void arm() override
    {
        auto& k = chain_.kernel();
        k.schedule(spec_.start, sim::EventKind::Harness, [this] {
            for (NodeId v : spec_.nodes) chain_.set_eclipsed(v, true);
        });
        if (std::isfinite(spec_.stop)) {
            k.schedule(spec_.stop, sim::EventKind::Harness, [this] {
                for (NodeId v : spec_.nodes) chain_.set_eclipsed(v, false);
            });
        }
    }

private:
    Chain& chain_;
};

class Ddos final : public AttackController {
public:
    Ddos(Chain& chain, AttackSpec spec)
        : AttackController(std::move(spec)),
          chain_(chain),
          rng_(chain.kernel().rng_stream(chain.name() + ".ddos" + std::to_string(spec_.nodes.front())))
    {
    }

    void arm() override
    {
        if (spec_.rate <= 0.0) return;
        for (NodeId n : spec_.nodes) chain_.set_adversarial(n, true);
        chain_.kernel().schedule(spec_.start, sim::EventKind::Harness, [this] { emit(); });
    }

private:
    void emit()
    {
        auto& k = chain_.kernel();
        if (k.now() >= spec_.stop) return;
        for (NodeId n : spec_.nodes) chain_.send_junk(n);
        k.schedule_in(rng_.exponential(1.0 / spec_.rate), sim::EventKind::Timer, [this] { emit(); });
    }

    Chain& chain_;
    sim::RngStream& rng_;
};

class CrashSilence final : public AttackController {
public:
    CrashSilence(Chain& chain, AttackSpec spec) : AttackController(std::move(spec)), chain_(chain) {}

    void arm() override
    {
        auto& k = chain_.kernel();
        k.schedule(spec_.start, sim::EventKind::Harness, [this] {
            for (NodeId n : spec_.nodes) chain_.set_silent(n, true);
        });
        if (std::isfinite(spec_.stop)) {
            k.schedule(spec_.stop, sim::EventKind::Harness, [this] {
                for (NodeId n : spec_.nodes) chain_.set_silent(n, false);
            });
        }
    }

private:
    Chain& chain_;
};

} // namespace

std::unique_ptr<AttackController> make_attack(Chain& chain, AttackSpec spec, TxIdAllocator& ids)
{
    if (spec.nodes.empty()) throw AttackConflict(std::string(to_string(spec.kind)) + ": no nodes given");
    for (NodeId n : spec.nodes) {
        const bool must_mine = spec.kind == AttackKind::SelfishMining || spec.kind == AttackKind::DoubleSpend;
        if (n >= chain.miner_count() || (must_mine && chain.node(n).share <= 0.0)) {
            throw AttackConflict(std::string(to_string(spec.kind)) + ": node " + std::to_string(n) +
                                 " is not a miner of chain " + chain.name());
        }
    }
    if (spec.stop < spec.start) throw AttackConflict("attack stops before it starts");
    switch (spec.kind) {
    case AttackKind::SelfishMining: return std::make_unique<SelfishMining>(chain, std::move(spec));
    case AttackKind::Eclipse: return std::make_unique<Eclipse>(chain, std::move(spec));
    case AttackKind::Ddos: return std::make_unique<Ddos>(chain, std::move(spec));
    case AttackKind::DoubleSpend: {
        if (spec.victim_dest == chain.id()) throw AttackConflict("double-spend victim must be inter-chain");
        if (spec.nodes.size() == chain.miner_count()) throw AttackConflict("double-spend needs an honest miner");
        return std::make_unique<DoubleSpend>(chain, std::move(spec), ids);
    }
    case AttackKind::CrashSilence: return std::make_unique<CrashSilence>(chain, std::move(spec));
    }
    throw AttackConflict("unknown attack kind");
}

AttackController& AttackSet::add(Chain& chain, AttackSpec spec, TxIdAllocator& ids)
{
    if (spec.uses_attackers()) {
        for (const auto& c : controllers_) {
            const auto& other = c->spec();
            if (!other.uses_attackers() || other.chain != spec.chain) continue;
            for (NodeId n : spec.nodes) {
                if (std::find(other.nodes.begin(), other.nodes.end(), n) != other.nodes.end()) {
                    throw AttackConflict("miner " + std::to_string(n) + " of chain " + chain.name() +
                                         " appears in two attacks");
                }
            }
        }
    }
    controllers_.push_back(make_attack(chain, std::move(spec), ids));
    return *controllers_.back();
}

void AttackSet::arm_all()
{
    for (auto& c : controllers_) c->arm();
}

} // namespace xchain::chain
