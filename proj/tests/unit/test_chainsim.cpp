#include "oracle.hpp"
#include "xchain/chain/attacks.hpp"
#include "xchain/chain/chain.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <memory>

using namespace xchain;
using namespace xchain::chain;

namespace {

ChainSpec make_spec(std::vector<double> shares, double interval = 10.0, LatencySpec latency = {LatencyModel::Constant, 0.0, 0.0})
{
    ChainSpec s;
    s.id = 0;
    s.name = "A";
    s.shares = std::move(shares);
    s.block_interval = interval;
    s.latency = latency;
    return s;
}

std::vector<double> equal_shares(std::size_t n, double rest = 1.0)
{
    return std::vector<double>(n, rest / static_cast<double>(n));
}

BlockPtr block(BlockId id, const BlockPtr& parent)
{
    auto b = std::make_shared<Block>();
    b->id = id;
    b->parent = parent->id;
    b->height = parent->height + 1;
    return b;
}

BlockPtr genesis()
{
    auto g = std::make_shared<Block>();
    g->id = 1000;
    return g;
}

// Published blocks left off the final best chain of miner `node`.
double stale_rate(const Chain& c, NodeId node)
{
    const auto& store = c.node(node).store;
    std::uint64_t published = 0;
    std::uint64_t stale = 0;
    for (const auto& b : c.mined_blocks()) {
        if (!c.was_published(b->id)) continue;
        ++published;
        if (!store.on_best_chain(b->id)) ++stale;
    }
    return published ? static_cast<double>(stale) / static_cast<double>(published) : 0.0;
}

} // namespace

TEST(ChainSpec, SharesAboveOneRejected)
{
    EXPECT_THROW(validate(make_spec({0.6, 0.5})), SpecError);
    EXPECT_THROW(validate(make_spec({1.2, -0.2})), SpecError);
    EXPECT_NO_THROW(validate(make_spec({0.5, 0.5})));
}

TEST(Mining, SingleMinerMeanInterval)
{
    sim::Kernel k(3);
    Chain c(k, make_spec({1.0}));
    c.start();
    k.run_until(50000.0);
    const auto n = c.mined_blocks().size();
    // Gamma(n, 10) total time: SE of the mean interval is 10/sqrt(n).
    EXPECT_NEAR(50000.0 / static_cast<double>(n), 10.0, 4 * 10.0 / std::sqrt(static_cast<double>(n)));
}

TEST(Mining, FourEqualMinersSuperpose)
{
    sim::Kernel k(11);
    Chain c(k, make_spec(equal_shares(4)));
    c.start();
    k.run_until(100000.0);
    const auto& blocks = c.mined_blocks();
    ASSERT_GE(blocks.size(), 9000u);
    const double mean = (blocks.back()->timestamp - blocks.front()->timestamp) / static_cast<double>(blocks.size() - 1);
    EXPECT_NEAR(mean, 10.0, 0.5);
    // Each miner contributes roughly a quarter.
    std::vector<int> per(4, 0);
    for (const auto& b : blocks) ++per[b->miner];
    for (int v : per) EXPECT_NEAR(v / static_cast<double>(blocks.size()), 0.25, 0.02);
}

TEST(BlockStore, LinearChainTip)
{
    auto g = genesis();
    BlockStore s(g);
    auto b1 = block(1, g);
    auto b2 = block(2, b1);
    s.add(b1, 1.0);
    s.add(b2, 2.0);
    EXPECT_EQ(s.best_tip(), 2u);
    EXPECT_EQ(s.best_height(), 2u);
    EXPECT_EQ(s.fork_choice(), s.best_tip());
}

TEST(BlockStore, TieGoesToFirstArrivalThenLongerWins)
{
    auto g = genesis();
    BlockStore s(g);
    std::vector<BlockPtr> a{g};
    std::vector<BlockPtr> b{g};
    for (BlockId i = 1; i <= 5; ++i) a.push_back(block(i, a.back()));
    for (BlockId i = 11; i <= 16; ++i) b.push_back(block(i, b.back()));
    for (int i = 1; i <= 5; ++i) s.add(a[i], i);
    for (int i = 1; i <= 5; ++i) EXPECT_FALSE(s.add(b[i], 10 + i).tip_change.has_value());
    EXPECT_EQ(s.best_tip(), 5u);
    auto out = s.add(b[6], 20.0);
    ASSERT_TRUE(out.tip_change.has_value());
    EXPECT_EQ(s.best_tip(), 16u);
    ASSERT_EQ(out.tip_change->pruned.size(), 5u);
    for (int i = 0; i < 5; ++i) EXPECT_EQ(out.tip_change->pruned[i]->id, static_cast<BlockId>(i + 1));
    EXPECT_EQ(out.tip_change->added.size(), 6u);
    EXPECT_EQ(s.fork_choice(), s.best_tip());
}

TEST(BlockStore, Depth)
{
    auto g = genesis();
    BlockStore s(g);
    std::vector<BlockPtr> chain{g};
    for (BlockId i = 1; i <= 10; ++i) {
        chain.push_back(block(i, chain.back()));
        s.add(chain.back(), i);
    }
    EXPECT_EQ(s.depth(10), 0u);
    EXPECT_EQ(s.depth(4), 6u);
    auto side = block(50, chain[3]);
    s.add(side, 20.0);
    EXPECT_FALSE(s.depth(50).has_value());
    EXPECT_THROW(s.depth(999), UnknownBlock);
}

TEST(BlockStore, OrphanConnectsWhenParentArrives)
{
    auto g = genesis();
    BlockStore s(g);
    auto b1 = block(1, g);
    auto b2 = block(2, b1);
    auto b3 = block(3, b2);
    EXPECT_EQ(s.add(b3, 1.0).status, AddStatus::Orphaned);
    EXPECT_EQ(s.add(b2, 1.0).status, AddStatus::Orphaned);
    EXPECT_EQ(s.missing_ancestor(b3->parent), 1u);
    auto out = s.add(b1, 2.0);
    EXPECT_EQ(out.status, AddStatus::Connected);
    EXPECT_EQ(out.connected.size(), 3u);
    EXPECT_EQ(s.best_tip(), 3u);
}

TEST(Transactions, FreshTxIsIncluded)
{
    sim::Kernel k(5);
    Chain c(k, make_spec(equal_shares(3)));
    c.start();
    auto tx = make_tx(1, 0, 0, "hello", 0.0);
    EXPECT_EQ(c.submit_tx(tx, 0), SubmitResult::Accepted);
    k.run_until(300.0);
    EXPECT_TRUE(c.node(1).store.locate_tx(1).has_value());
}

TEST(Transactions, DuplicateRejected)
{
    sim::Kernel k(5);
    Chain c(k, make_spec(equal_shares(3)));
    auto tx = make_tx(1, 0, 0, "x", 0.0);
    EXPECT_EQ(c.submit_tx(tx, 0), SubmitResult::Accepted);
    EXPECT_EQ(c.submit_tx(tx, 1), SubmitResult::Duplicate);
}

TEST(Transactions, InterKindRequiresDistinctChains)
{
    auto tx = make_tx(1, 0, 1, "x", 0.0);
    EXPECT_EQ(tx->kind, TxKind::Inter);
    EXPECT_EQ(make_tx(2, 1, 1, "x", 0.0)->kind, TxKind::Intra);
}

TEST(Transactions, CapacityAndFifoOrder)
{
    sim::Kernel k(9);
    Chain c(k, make_spec({1.0}));
    for (TxId i = 1; i <= 1000; ++i) c.submit_tx(make_tx(i, 0, 0, "", 0.0), 0);
    c.start();
    k.run_until(2000.0);
    const auto& store = c.node(0).store;
    std::vector<TxId> order;
    std::size_t blocks_with_txs = 0;
    for (BlockId id : store.best_chain()) {
        const auto& b = *store.get(id);
        EXPECT_LE(b.txs.size(), 100u);
        if (!b.txs.empty()) ++blocks_with_txs;
        for (const auto& tx : b.txs) order.push_back(tx->id);
    }
    ASSERT_EQ(order.size(), 1000u);
    EXPECT_GE(blocks_with_txs, 10u);
    for (std::size_t i = 0; i < order.size(); ++i) EXPECT_EQ(order[i], i + 1);
}

TEST(Gossip, ZeroLatencyArrivesAtSameInstant)
{
    sim::Kernel k(2);
    Chain c(k, make_spec(equal_shares(5)));
    c.start();
    k.run_until(200.0);
    for (const auto& b : c.mined_blocks()) {
        for (NodeId n = 0; n < 5; ++n) EXPECT_EQ(c.node(n).store.arrival_time(b->id), b->timestamp);
    }
}

TEST(Gossip, UniformLatencySupport)
{
    sim::Kernel k(2);
    Chain c(k, make_spec(equal_shares(12), 10.0, {LatencyModel::Uniform, 0.1, 0.5}));
    c.start();
    k.run_until(2000.0);
    std::size_t checked = 0;
    for (const auto& b : c.mined_blocks()) {
        for (NodeId n = 0; n < 12; ++n) {
            if (n == b->miner || !c.node(n).store.contains(b->id)) continue;
            const double delay = c.node(n).store.arrival_time(b->id) - b->timestamp;
            // Blocks fetched by parent request may take a second round trip.
            EXPECT_GE(delay, 0.1 - 1e-12);
            EXPECT_LE(delay, 1.5 + 1e-12);
            ++checked;
        }
    }
    EXPECT_GT(checked, 1000u);
}

TEST(Gossip, DirectDeliveryWithinLatencyBounds)
{
    // With no forks possible (one miner) every block arrives by direct gossip.
    sim::Kernel k(4);
    auto spec = make_spec({1.0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0}, 10.0, {LatencyModel::Uniform, 0.1, 0.5});
    Chain c(k, spec);
    c.start();
    k.run_until(3000.0);
    for (const auto& b : c.mined_blocks()) {
        for (NodeId n = 1; n < 12; ++n) {
            const double delay = c.node(n).store.arrival_time(b->id) - b->timestamp;
            EXPECT_GE(delay, 0.1);
            EXPECT_LE(delay, 0.5);
        }
    }
}

TEST(Gossip, EclipsedNodeReceivesNothing)
{
    sim::Kernel k(2);
    Chain c(k, make_spec({0.5, 0.5, 0.0}));
    c.set_eclipsed(2, true);
    c.start();
    k.run_until(500.0);
    EXPECT_EQ(c.node(2).store.best_height(), 0u);
    EXPECT_EQ(c.node(2).blocks_received, 0u);
    EXPECT_GT(c.node(0).store.best_height(), 10u);
}

TEST(Blacklist, HonestTipsIgnoreBlacklistedMiner)
{
    sim::Kernel k(8);
    Chain c(k, make_spec({0.5, 0.25, 0.25}));
    c.blacklist(0);
    c.start();
    k.run_until(2000.0);
    for (NodeId n = 1; n < 3; ++n) {
        const auto& store = c.node(n).store;
        for (BlockId id : store.best_chain()) EXPECT_TRUE(store.get(id)->is_genesis() || store.get(id)->miner != 0);
    }
}

namespace {

struct RaceResult {
    std::uint64_t trials = 0;
    std::uint64_t published = 0;
};

RaceResult run_races(double q, std::uint64_t hold, std::uint64_t max_deficit, std::uint64_t trials, std::uint64_t seed)
{
    RaceResult r;
    for (std::uint64_t t = 0; t < trials; ++t) {
        sim::Kernel k(seed + t);
        std::vector<double> shares{q};
        for (int i = 0; i < 4; ++i) shares.push_back((1.0 - q) / 4.0);
        Chain c(k, make_spec(shares, 10.0, {LatencyModel::Constant, 0.001, 0.0}));
        TxIdAllocator ids;
        AttackSet attacks;
        AttackSpec spec;
        spec.kind = AttackKind::DoubleSpend;
        spec.nodes = {0};
        spec.start = 1.0;
        spec.victim_dest = 1;
        spec.hold_depth = hold;
        spec.max_deficit = max_deficit;
        auto& ctl = attacks.add(c, spec, ids);
        attacks.arm_all();
        c.start();
        const auto* out = ctl.double_spend();
        double until = 0.0;
        while (!(out->published || out->gave_up)) {
            until += 500.0;
            k.run_until(until);
        }
        ++r.trials;
        r.published += out->published ? 1 : 0;
    }
    return r;
}

} // namespace

TEST(DoubleSpend, MatchesExactRaceProbability)
{
    struct Case {
        double q;
        std::uint64_t hold;
    };
    for (Case cs : {Case{0.3, 2}, Case{0.2, 3}, Case{0.45, 1}}) {
        const std::uint64_t n = 1500;
        const double expected = oracle::double_spend_race(cs.q, static_cast<int>(cs.hold), 20);
        const auto r = run_races(cs.q, cs.hold, 20, n, 1000 + cs.hold);
        const double rate = static_cast<double>(r.published) / static_cast<double>(n);
        EXPECT_NEAR(rate, expected, oracle::binomial_margin(expected, n, 4.0))
            << "q=" << cs.q << " hold=" << cs.hold;
    }
}

TEST(DoubleSpend, EvenPowerAlmostAlwaysWins)
{
    const std::uint64_t n = 300;
    const auto r = run_races(0.5, 1, 200, n, 77);
    const double expected = oracle::double_spend_race(0.5, 1, 200);
    EXPECT_GT(expected, 0.99);
    EXPECT_GE(static_cast<double>(r.published) / n, expected - oracle::binomial_margin(expected, n, 4.0));
}

TEST(DoubleSpend, ConflictingAttackersRejected)
{
    sim::Kernel k(1);
    Chain c(k, make_spec({0.3, 0.7}));
    TxIdAllocator ids;
    AttackSet attacks;
    AttackSpec s;
    s.kind = AttackKind::SelfishMining;
    s.nodes = {0};
    attacks.add(c, s, ids);
    s.kind = AttackKind::DoubleSpend;
    s.victim_dest = 1;
    EXPECT_THROW(attacks.add(c, s, ids), AttackConflict);
}

TEST(SelfishMining, RaisesStaleRateAboveHonestBaseline)
{
    const LatencySpec lat{LatencyModel::Uniform, 0.1, 0.5};
    double honest_sum = 0.0;
    double selfish_sum = 0.0;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        std::vector<double> shares{0.35};
        for (int i = 0; i < 5; ++i) shares.push_back(0.13);
        {
            sim::Kernel k(seed);
            Chain c(k, make_spec(shares, 10.0, lat));
            c.start();
            k.run_until(20000.0);
            honest_sum += stale_rate(c, 1);
        }
        {
            sim::Kernel k(seed);
            Chain c(k, make_spec(shares, 10.0, lat));
            TxIdAllocator ids;
            AttackSet attacks;
            AttackSpec s;
            s.kind = AttackKind::SelfishMining;
            s.nodes = {0};
            attacks.add(c, s, ids);
            attacks.arm_all();
            c.start();
            k.run_until(20000.0);
            selfish_sum += stale_rate(c, 1);
        }
    }
    EXPECT_GT(selfish_sum, honest_sum);
    EXPECT_GT(selfish_sum / 3.0, 0.05);
}
