#include "xchain/harness/world.hpp"

#include "xchain/finality/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace xchain::harness {

World::World(Scenario scenario, std::optional<std::uint64_t> seed)
    : scenario_(std::move(scenario)), seed_(seed.value_or(scenario_.seed)), kernel_(seed_)
{
    wire();
}

World::~World() = default;

void World::violation(std::string what) { violations_.push_back(std::move(what)); }

void World::wire()
{
    for (const auto& c : scenario_.chains) chains_.push_back(std::make_unique<chain::Chain>(kernel_, c.spec));
    cluster_ = std::make_unique<connector::Cluster>(kernel_, scenario_.connector);
    finality_ = std::make_unique<finality::FinalityService>(kernel_, scenario_.policies, scenario_.finality_period);
    for (const auto& c : scenario_.chains) {
        if (c.assumed_q) finality_->set_adversary_floor(c.spec.id, *c.assumed_q);
    }

    relays_.resize(chains_.size());
    for (ChainId c = 0; c < chains_.size(); ++c) {
        auto& ch = *chains_[c];
        sentinels_.push_back(std::make_unique<sentinel::Sentinel>(c, ch.spec().shares, scenario_.detectors,
                                                                  ch.spec().latency.median()));
        for (std::uint32_t r = 0; r < scenario_.relays_per_chain; ++r) {
            relay::RelayHooks hooks;
            hooks.on_violation = [this](const std::string& what) { violation(what); };
            hooks.on_reversal = [this](TxId tx, sim::Time t) { reversals_[tx].push_back(t); };
            hooks.on_delivered = [this](const connector::LedgerEntry& e, sim::Time t) {
                delivered_.emplace(e.tx.id, t);
                ++delivery_count_[e.tx.id];
            };
            hooks.is_monitor = [this, c, r] { return monitor_of(c) == r; };
            const auto id = static_cast<relay::RelayId>(c * scenario_.relays_per_chain + r);
            relays_[c].push_back(std::make_unique<relay::RelayNode>(id, ch, *cluster_, *finality_, *sentinels_[c],
                                                                    audit_, std::move(hooks), scenario_.relay));
        }
    }

    for (const auto& a : scenario_.attacks) {
        chain::AttackSpec spec = a.spec;
        if (a.hold_auto) {
            const auto& shares = scenario_.chains[spec.chain].spec.shares;
            double q = 0.0;
            for (NodeId n : spec.nodes) q += shares.at(n);
            q = std::max(q, scenario_.chains[spec.chain].assumed_q.value_or(0.0));
            const auto* p = scenario_.policy(spec.chain, spec.victim_dest);
            try {
                spec.hold_depth = finality::min_confirmations(q, p ? p->epsilon : 1e-3);
            } catch (const finality::NoFiniteDepth&) {
                spec.hold_depth = 0;
            }
        }
        attacks_.add(*chains_[spec.chain], spec, ids_);
    }
}

std::optional<std::uint32_t> World::monitor_of(ChainId c) const
{
    const auto& rs = relays_.at(c);
    for (std::uint32_t r = 0; r < rs.size(); ++r) {
        if (!rs[r]->crashed()) return r;
    }
    return std::nullopt;
}

NodeId World::pick_entry(ChainId c, sim::RngStream& rng)
{
    auto& ch = *chains_[c];
    std::vector<NodeId> eligible;
    for (NodeId n = 0; n < ch.miner_count(); ++n) {
        const auto& node = ch.node(n);
        if (!node.silent && !node.adversarial && !ch.blacklisted().count(n)) eligible.push_back(n);
    }
    if (eligible.empty()) return static_cast<NodeId>(rng.below(ch.miner_count()));
    return eligible[rng.below(eligible.size())];
}

void World::schedule_traffic()
{
    for (const auto& t : scenario_.traffic) {
        auto& rng = kernel_.rng_stream("traffic." + scenario_.chain_name(t.source) + "." +
                                       scenario_.chain_name(t.dest));
        for (std::uint64_t i = 0; i < t.count; ++i) {
            const double at = t.start + static_cast<double>(i) * t.interval;
            if (at > scenario_.duration) break;
            kernel_.schedule(at, sim::EventKind::Harness, [this, t, i, &rng] {
                auto tx = chain::make_tx(ids_.next(), t.source, t.dest, "transfer-" + std::to_string(i), kernel_.now());
                scripted_.push_back(tx->id);
                chains_[t.source]->submit_tx(tx, pick_entry(t.source, rng));
            });
        }
    }
}

void World::schedule_intra(ChainId c)
{
    auto& ch = *chains_[c];
    const double rate = ch.spec().intra_tx_rate;
    if (rate <= 0.0) return;
    auto& rng = kernel_.rng_stream(ch.name() + ".intra");
    kernel_.schedule_in(rng.exponential(1.0 / rate), sim::EventKind::Harness, [this, c, &rng] {
        auto tx = chain::make_tx(ids_.next(), c, c, "intra", kernel_.now());
        chains_[c]->submit_tx(tx, pick_entry(c, rng));
        schedule_intra(c);
    });
}

void World::schedule_sweep(ChainId c, sim::Time at)
{
    if (at > scenario_.duration) return;
    kernel_.schedule(at, sim::EventKind::DetectorSweep, [this, c, at] {
        if (auto m = monitor_of(c)) handle(c, relays_[c][*m]->sweep());
        schedule_sweep(c, at + scenario_.detectors.sweep_period);
    });
}

void World::handle(ChainId c, const sentinel::SweepReport& report)
{
    const sim::Time now = kernel_.now();
    auto& s = *sentinels_[c];
    for (const auto& f : report.new_flags) {
        flags_.push_back(FlagEvent{f.time, c, f.node, sentinel::to_string(f.reason), s.q_est(), s.breaker().open});
    }
    auto& ch = *chains_[c];
    for (NodeId n : s.blacklist_candidates()) {
        if (ch.blacklisted().count(n)) continue;
        ch.blacklist(n);
        flags_.push_back(FlagEvent{now, c, n, "blacklisted", s.q_est(), s.breaker().open});
    }
    if (!report.breaker_changed) return;
    const bool open = report.breaker.open;
    flags_.push_back(FlagEvent{now, c, std::nullopt, open ? "breaker-open" : "breaker-closed", report.breaker.q_est, open});
    if (open) {
        episodes_.push_back(BreakerEpisode{c, now, std::nullopt});
        for (auto& r : relays_[c]) r->drop_pending();
    } else {
        for (auto it = episodes_.rbegin(); it != episodes_.rend(); ++it) {
            if (it->chain == c && !it->closed) {
                it->closed = now;
                break;
            }
        }
    }
}

void World::schedule_faults()
{
    for (const auto& f : scenario_.faults) {
        if (f.at > scenario_.duration) continue;
        kernel_.schedule(f.at, sim::EventKind::Harness, [this, f] { apply(f); });
    }
}

void World::apply(const FaultScript& f)
{
    switch (f.kind) {
    case FaultKind::CrashRelay: relays_.at(f.chain).at(f.relay)->crash(); break;
    case FaultKind::RecoverRelay: relays_.at(f.chain).at(f.relay)->recover(); break;
    case FaultKind::CrashConnector: cluster_->crash(f.connector); break;
    case FaultKind::CrashConnectorLeader:
        if (auto l = cluster_->leader()) cluster_->crash(*l);
        break;
    case FaultKind::RecoverConnector: cluster_->recover(f.connector); break;
    case FaultKind::ClearFlags: {
        auto report = sentinels_.at(f.chain)->clear(f.nodes, kernel_.now());
        for (NodeId n : f.nodes) {
            flags_.push_back(FlagEvent{kernel_.now(), f.chain, n, "cleared", report.breaker.q_est, report.breaker.open});
        }
        handle(f.chain, report);
        break;
    }
    }
}

void World::run()
{
    if (ran_) return;
    ran_ = true;
    for (auto& c : chains_) c->start();
    cluster_->start();
    finality_->start();
    for (auto& rs : relays_) {
        for (auto& r : rs) r->start();
    }
    attacks_.arm_all();
    schedule_traffic();
    for (ChainId c = 0; c < chains_.size(); ++c) {
        schedule_intra(c);
        schedule_sweep(c, scenario_.detectors.sweep_period);
    }
    schedule_faults();
    kernel_.run_until(scenario_.duration);
    check_invariants();
}

void World::check_invariants()
{
    const auto& cl = *cluster_;
    if (!cl.prefix_consistent()) violation("ledger prefix consistency across connector nodes");
    if (cl.safety_violations()) violation("connector applied conflicting entries at one seq");
    if (cl.leaders_in_term_violations()) violation("two connector leaders in one term");

    std::set<TxId> seen;
    for (const auto& e : cl.committed()) {
        if (!seen.insert(e.tx.id).second) violation("exactly-once commit: tx " + std::to_string(e.tx.id));
        for (const auto& ep : episodes_) {
            const bool inside = e.committed_at >= ep.opened && (!ep.closed || e.committed_at < *ep.closed);
            if (ep.chain == e.tx.source && inside) {
                violation("breaker soundness: tx " + std::to_string(e.tx.id) + " from " +
                          scenario_.chain_name(e.tx.source) + " committed while the breaker was open");
            }
        }
    }
    for (const auto& [tx, n] : delivery_count_) {
        if (n > 1) violation("exactly-once delivery: tx " + std::to_string(tx) + " injected " + std::to_string(n) + " times");
        if (!seen.count(tx)) violation("delivery without ledger entry: tx " + std::to_string(tx));
    }
}

std::optional<sim::Time> World::delivered_at(TxId tx) const
{
    auto it = delivered_.find(tx);
    if (it == delivered_.end()) return std::nullopt;
    return it->second;
}

std::optional<sim::Time> World::first_flag(ChainId c, NodeId node, sentinel::FlagReason reason) const
{
    const std::string r = sentinel::to_string(reason);
    for (const auto& f : flags_) {
        if (f.chain == c && f.node == node && f.reason == r) return f.time;
    }
    return std::nullopt;
}

bool World::on_source_chain(ChainId source, TxId tx) const
{
    const auto& ch = *chains_.at(source);
    const auto& store = ch.node(relays_.at(source).front()->node()).store;
    return store.locate_tx(tx).has_value() && !store.is_conflicted(tx);
}

MetricsReport World::report() const
{
    MetricsReport m;
    m.seed = seed_;
    m.duration = scenario_.duration;
    m.events = kernel_.fired_count();

    for (ChainId c = 0; c < chains_.size(); ++c) {
        const auto& ch = *chains_[c];
        const auto& r0 = *relays_[c].front();
        const auto& store = ch.node(r0.node()).store;
        ChainMetrics cm;
        cm.name = ch.name();
        cm.mined = ch.mined_blocks().size();
        cm.best_height = store.best_height();
        for (const auto& b : ch.mined_blocks()) {
            if (!ch.was_published(b->id)) continue;
            if (!store.contains(b->id) || !store.on_best_chain(b->id)) ++cm.stale;
        }
        cm.t_hat = r0.last_stats().t_hat;
        cm.q_est = sentinels_[c]->q_est();
        cm.breaker_open = sentinels_[c]->breaker().open;
        m.chains.push_back(cm);
    }

    std::map<TxId, sim::Time> observed;
    std::set<TxId> dropped;
    for (const auto& r : audit_.records()) {
        if (!r.from) observed.emplace(r.tx, r.time);
        if (r.to == relay::TransferState::Dropped) dropped.insert(r.tx);
    }
    m.observed = observed.size();
    std::vector<double> latencies;
    for (const auto& [tx, t0] : observed) {
        if (auto it = delivered_.find(tx); it != delivered_.end()) {
            ++m.delivered;
            latencies.push_back(it->second - t0);
        } else if (dropped.count(tx)) {
            ++m.dropped;
        } else {
            ++m.pending;
        }
    }
    if (!latencies.empty()) {
        std::sort(latencies.begin(), latencies.end());
        auto& l = m.delivery_latency;
        l.count = latencies.size();
        double sum = 0.0;
        for (double x : latencies) sum += x;
        l.mean = sum / static_cast<double>(l.count);
        auto rank = [&](double p) {
            const auto i = static_cast<std::size_t>(std::ceil(p * static_cast<double>(l.count))) - 1;
            return latencies[std::min(i, latencies.size() - 1)];
        };
        l.p50 = rank(0.5);
        l.p95 = rank(0.95);
        l.max = latencies.back();
    }
    m.scripted = scripted_.size();
    for (TxId tx : scripted_) m.scripted_delivered += delivered_.count(tx);
    m.ledger_length = cluster_->committed().size();

    std::set<TxId> reversed;
    for (const auto& [tx, times] : reversals_) reversed.insert(tx);
    m.reversals = reversed.size();
    for (const auto& [tx, t] : delivered_) {
        if (!reversed.count(tx)) continue;
        const auto& e = cluster_->committed().at(*cluster_->lookup(tx) - 1);
        if (!on_source_chain(e.tx.source, tx)) ++m.reversed_after_delivery;
    }
    for (const auto& a : attacks_.controllers()) {
        if (const auto* ds = a->double_spend(); ds && ds->victim) {
            ++m.double_spend_attempts;
            m.double_spend_published += ds->published ? 1 : 0;
        }
    }
    m.flags = flags_;
    m.breakers = episodes_;
    m.violations = violations_;
    return m;
}

} // namespace xchain::harness
