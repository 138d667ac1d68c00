#include "oracle.hpp"
#include "xchain/finality/service.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace xchain;
using namespace xchain::finality;

TEST(CatchUp, Boundaries)
{
    EXPECT_EQ(catch_up_probability(0.0, 1), 0.0);
    EXPECT_EQ(catch_up_probability(0.5, 6), 1.0);
    EXPECT_EQ(catch_up_probability(0.7, 3), 1.0);
    EXPECT_EQ(catch_up_probability(0.2, 0), 1.0);
    EXPECT_THROW(catch_up_probability(1.5, 1), DomainError);
    EXPECT_THROW(catch_up_probability(0.1, -1), DomainError);
}

TEST(CatchUp, KnownValues)
{
    EXPECT_NEAR(catch_up_probability(0.1, 6), 2.428e-4, 1e-7);
    EXPECT_NEAR(catch_up_probability(0.1, 5), 9.1368e-4, 1e-7);
    EXPECT_NEAR(catch_up_probability(0.3, 16), 0.0076219, 1e-7);
    EXPECT_NEAR(catch_up_probability(0.45, 1), 0.9197758, 1e-7);
}

TEST(CatchUp, AgreesWithMonteCarlo)
{
    const auto est = oracle::mc_catch_up(0.1, 6, 10'000'000, 2024);
    const double p = catch_up_probability(0.1, 6);
    EXPECT_LE(std::abs(est.p - p), 3.0 * std::sqrt(p * (1 - p) / static_cast<double>(est.n)));
    const auto is = oracle::is_catch_up(0.1, 6, 1'000'000, 2025);
    EXPECT_LE(std::abs(is.p - p), 3.0 * is.se);
}

TEST(CatchUp, MonotoneInBothArguments)
{
    for (double q : {0.05, 0.1, 0.2, 0.3, 0.4, 0.45}) {
        for (int z = 1; z < 60; ++z) EXPECT_LE(catch_up_probability(q, z), catch_up_probability(q, z - 1));
    }
    for (int z : {1, 3, 6, 12}) {
        double prev = 0.0;
        for (double q = 0.0; q < 0.5; q += 0.01) {
            const double p = catch_up_probability(q, z);
            EXPECT_GE(p, prev);
            prev = p;
        }
    }
}

TEST(CatchUp, TinyValuesFloorToZero)
{
    EXPECT_EQ(catch_up_probability(0.01, 40), 0.0);
    EXPECT_GT(catch_up_probability(0.1, 12), 0.0);
}

TEST(MinConfirmations, Examples)
{
    EXPECT_EQ(min_confirmations(0.0, 0.01), 1u);
    EXPECT_EQ(min_confirmations(0.1, 1e-3), 5u);
    EXPECT_EQ(min_confirmations(0.1, 2.5e-4), 6u);
    EXPECT_EQ(min_confirmations(0.3, 1e-3), 24u);
    EXPECT_EQ(min_confirmations(0.45, 1e-3), 340u);
    EXPECT_THROW(min_confirmations(0.55, 1e-3), NoFiniteDepth);
    EXPECT_THROW(min_confirmations(0.5, 1e-3), NoFiniteDepth);
    EXPECT_THROW(min_confirmations(0.1, 0.0), DomainError);
}

TEST(MinConfirmations, IsSmallestSatisfyingDepth)
{
    for (double q : {0.05, 0.15, 0.25, 0.35}) {
        for (double eps : {1e-2, 1e-3, 1e-4}) {
            const auto z = static_cast<std::int64_t>(min_confirmations(q, eps));
            EXPECT_LE(catch_up_probability(q, z), eps);
            if (z > 1) {
                EXPECT_GT(catch_up_probability(q, z - 1), eps);
            }
        }
    }
}

TEST(AcceptancePeriod, Examples)
{
    EXPECT_EQ(acceptance_period(6, 600.0), 3600.0);
    EXPECT_EQ(acceptance_period(0, 10.0), 0.0);
    EXPECT_EQ(acceptance_period(5, 10.0), 50.0);
}

TEST(Labels, Mapping)
{
    EXPECT_EQ(epsilon_for_label("HIGH"), 1e-4);
    EXPECT_EQ(epsilon_for_label("MED"), 1e-3);
    EXPECT_EQ(epsilon_for_label("LOW"), 1e-2);
    EXPECT_FALSE(epsilon_for_label("SUPER").has_value());
}

TEST(Table, OnePair)
{
    std::map<ChainId, FinalityInputs> stats{{0, {0.1, 10.0}}};
    auto t = build_table(stats, {{0, 1, 1e-3}}, 5.0);
    const auto* e = t.lookup(0, 1);
    ASSERT_NE(e, nullptr);
    EXPECT_EQ(e->status, EntryStatus::Ok);
    EXPECT_EQ(e->z, 5u);
    EXPECT_EQ(e->advisory_wait, 50.0);
    EXPECT_EQ(e->computed_at, 5.0);
}

TEST(Table, SharedSourceSameEpsilonSameDepth)
{
    std::map<ChainId, FinalityInputs> stats{{0, {0.2, 10.0}}};
    auto t = build_table(stats, {{0, 1, 1e-3}, {0, 2, 1e-3}}, 0.0);
    EXPECT_EQ(t.lookup(0, 1)->z, t.lookup(0, 2)->z);
}

TEST(Table, MajorityAdversaryHalts)
{
    std::map<ChainId, FinalityInputs> stats{{0, {0.51, 10.0}}};
    auto t = build_table(stats, {{0, 1, 1e-3}}, 0.0);
    EXPECT_EQ(t.lookup(0, 1)->status, EntryStatus::Halted);
    EXPECT_FALSE(t.lookup(0, 1)->z.has_value());
}

TEST(Table, MissingStats)
{
    auto t = build_table({}, {{0, 1, 1e-3}}, 0.0);
    EXPECT_EQ(t.lookup(0, 1)->status, EntryStatus::MissingStats);
    EXPECT_EQ(t.lookup(1, 0), nullptr);
}

TEST(Service, FloorAndRecompute)
{
    sim::Kernel k(1);
    FinalityService svc(k, {{0, 1, 1e-3}}, 30.0);
    svc.set_adversary_floor(0, 0.1);
    svc.push_stats(0, {0.0, 10.0});
    ASSERT_NE(svc.table().lookup(0, 1), nullptr);
    EXPECT_EQ(svc.table().lookup(0, 1)->z, 5u);
    svc.push_stats(0, {0.3, 10.0});
    EXPECT_EQ(svc.table().lookup(0, 1)->z, 24u);
    svc.push_stats(0, {0.1, 0.0});
    EXPECT_EQ(svc.table().lookup(0, 1)->status, EntryStatus::MissingStats);
    EXPECT_FALSE(svc.table().lookup(0, 1)->error.empty());
}
