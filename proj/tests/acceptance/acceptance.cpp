// End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
// exits nonzero when any criterion fails. Pass criterion numbers as
// arguments to run a subset.

#include "oracle.hpp"
#include "xchain/common/format.hpp"
#include "xchain/finality/table.hpp"
#include "xchain/harness/report.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace xchain;
using namespace xchain::harness;
namespace fs = std::filesystem;

namespace {

struct Verdict {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what)
    {
        if (ok) return;
        pass = false;
        if (!detail.empty()) detail += "; ";
        detail += what;
    }
    void note(const std::string& what)
    {
        if (!detail.empty()) detail += "; ";
        detail += what;
    }
};

class Stopwatch {
public:
    double seconds() const
    {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string data(const std::string& name) { return std::string(XCHAIN_TEST_DATA) + "/" + name; }

std::string fmt(const char* pattern, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, pattern, v);
    return buf;
}

// 1. Closed-form reversal probability against plain Monte Carlo.
Verdict finality_vs_oracle()
{
    Verdict v;
    Stopwatch clock;
    constexpr std::uint64_t trials = 1'000'000;
    int points = 0;
    double worst = 0.0;
    for (double q : {0.05, 0.1, 0.2, 0.3, 0.45}) {
        for (int z = 0; z <= 12; ++z) {
            const double p = finality::catch_up_probability(q, z);
            const auto est = oracle::mc_catch_up(q, z, trials, 7919u * static_cast<std::uint64_t>(points + 1));
            // Binomial SE under the closed-form value, with continuity correction.
            const double se = std::sqrt(p * (1 - p) / static_cast<double>(trials));
            const double diff = std::abs(est.p - p);
            const double tol = 3.0 * se + 0.5 / static_cast<double>(trials);
            worst = std::max(worst, diff / tol);
            v.require(diff <= tol, "q=" + fmt9(q) + " z=" + std::to_string(z) + " mc=" + fmt9(est.p) +
                                       " closed=" + fmt9(p));
            ++points;
        }
    }
    const double secs = clock.seconds();
    v.require(secs < 120.0, "runtime " + fmt("%.1f", secs) + "s exceeds 120s");
    v.note(std::to_string(points) + " points, worst |diff|/tol " + fmt("%.2f", worst) + ", " + fmt("%.1f", secs) + "s");
    return v;
}

// 2. Scan result against the importance-sampled quantile search.
Verdict min_confirmation_table()
{
    Verdict v;
    const std::pair<double, std::uint64_t> published[] = {{0.10, 5}, {0.30, 24}, {0.45, 340}};
    for (auto [q, table_z] : published) {
        const auto scan = finality::min_confirmations(q, 1e-3);
        const auto mc = static_cast<std::uint64_t>(oracle::is_min_confirmations(q, 1e-3, 200'000, 4242));
        v.require(scan == mc, "q=" + fmt9(q) + " scan " + std::to_string(scan) + " vs oracle " + std::to_string(mc));
        v.require(scan == table_z, "q=" + fmt9(q) + " differs from the published race table");
        v.note("q=" + fmt9(q) + " z=" + std::to_string(scan));
    }
    return v;
}

// 3. Reversal-after-delivery rate of a double-spend campaign.
Verdict security_gate()
{
    Verdict v;
    Stopwatch clock;
    const Scenario sc = load_scenario(data("double_spend.toml"));
    const double epsilon = sc.policy(0, 1)->epsilon;
    constexpr std::size_t trials = 5000;
    const auto runs = run_trials(sc, sc.seed, trials);
    std::uint64_t attempts = 0;
    std::uint64_t delivered = 0;
    std::uint64_t reversed = 0;
    std::uint64_t published = 0;
    std::uint64_t violations = 0;
    for (const auto& m : runs) {
        attempts += m.double_spend_attempts;
        delivered += m.delivered;
        reversed += m.reversed_after_delivery;
        published += m.double_spend_published;
        violations += m.violations.size();
    }
    const double rate = static_cast<double>(reversed) / static_cast<double>(attempts);
    const double limit = epsilon + oracle::binomial_margin(epsilon, attempts, 2.576);
    const double secs = clock.seconds();
    v.require(attempts == trials, "attempts " + std::to_string(attempts));
    v.require(delivered >= trials * 9 / 10, "only " + std::to_string(delivered) + " victims delivered");
    v.require(violations == 0, std::to_string(violations) + " invariant violations");
    v.require(rate <= limit, "rate above limit");
    v.require(secs < 600.0, "runtime " + fmt("%.1f", secs) + "s exceeds 600s");
    v.note(std::to_string(reversed) + "/" + std::to_string(attempts) + " reversed after delivery (rate " + fmt9(rate) +
           ", limit " + fmt9(limit) + "), " + std::to_string(published) + " branches published, " +
           fmt("%.1f", secs) + "s");
    return v;
}

// 4. Six confirmations correspond to the 2.5e-4 risk level at q = 0.1.
Verdict six_confirmation_anchor()
{
    Verdict v;
    std::map<ChainId, finality::FinalityInputs> stats{{0, {0.1, 600.0}}};
    const auto table = finality::build_table(stats, {{0, 1, 1e-3}, {0, 2, 2.5e-4}}, 0.0);
    const auto* med = table.lookup(0, 1);
    const auto* six = table.lookup(0, 2);
    v.require(med && med->z == 5u, "eps=1e-3 did not give z=5");
    v.require(six && six->z == 6u, "eps=2.5e-4 did not give z=6");
    v.require(six && six->advisory_wait == 3600.0, "six confirmations at T=600 is not 3600s");
    v.require(oracle::is_min_confirmations(0.1, 1e-3, 1'000'000, 11) == 5, "oracle disagrees at eps=1e-3");
    v.require(oracle::is_min_confirmations(0.1, 2.5e-4, 1'000'000, 12) == 6, "oracle disagrees at eps=2.5e-4");
    v.note("z=5 at 1e-3, z=6 at 2.5e-4 (advisory 3600s at T=600)");
    return v;
}

// Open intervals of chain `c` reconstructed from the flag log.
std::vector<std::pair<double, double>> open_intervals(const World& w, ChainId c)
{
    std::vector<std::pair<double, double>> out;
    for (const auto& f : w.flag_log()) {
        if (f.node || f.chain != c || f.reason.rfind("breaker", 0) != 0) continue;
        if (f.breaker_open) out.push_back({f.time, w.scenario().duration + 1.0});
        else if (!out.empty()) out.back().second = f.time;
    }
    return out;
}

// 5. Breaker opens at 0.34 with no commits while open; stays closed at 0.32.
Verdict circuit_breaker()
{
    Verdict v;
    {
        World w(load_scenario(data("breaker.toml")));
        w.run();
        const auto open = open_intervals(w, 0);
        v.require(!open.empty(), "breaker never opened at 0.34");
        auto inside = [&](double t) {
            return std::any_of(open.begin(), open.end(), [t](auto iv) { return t >= iv.first && t < iv.second; });
        };
        std::uint64_t audit_commits = 0;
        for (const auto& r : w.audit().records()) {
            if (r.chain == 0 && r.to == relay::TransferState::Committed && inside(r.time)) ++audit_commits;
        }
        std::uint64_t ledger_commits = 0;
        for (const auto& e : w.cluster().committed()) {
            if (e.tx.source == 0 && inside(e.committed_at)) ++ledger_commits;
        }
        const auto m = w.report();
        v.require(audit_commits == 0, std::to_string(audit_commits) + " audit commits while open");
        v.require(ledger_commits == 0, std::to_string(ledger_commits) + " ledger entries while open");
        v.require(m.violations.empty(), "invariant violations");
        if (!open.empty()) {
            v.note("0.34: open [" + fmt9(open[0].first) + ", " + fmt9(open[0].second) + "), " +
                   std::to_string(m.dropped) + " dropped, 0 commits while open");
        }
    }
    {
        World w(load_scenario(data("breaker32.toml")));
        w.run();
        const auto& s = w.sentinel(0);
        v.require(open_intervals(w, 0).empty(), "breaker opened at 0.32");
        v.require(s.flags().flagged(0) && s.flags().flagged(1), "silenced miners were not flagged");
        v.note("0.32: closed with q_est " + fmt9(s.q_est()));
    }
    return v;
}

double honest_message_rate(const World& w, ChainId c)
{
    // Messages each miner delivered to the chain's first relay, per second.
    const auto& counts = w.relay(c, 0).last_stats().messages;
    double total = 0.0;
    const std::size_t miners = w.chain(c).miner_count();
    for (NodeId n = 0; n < miners; ++n) {
        auto it = counts.find(n);
        if (it != counts.end()) total += static_cast<double>(it->second);
    }
    return total / static_cast<double>(miners) / w.scenario().duration;
}

// 6. Detection power and false-positive calibration over 20 seeds.
Verdict detectors()
{
    Verdict v;
    constexpr std::uint64_t seeds = 20;
    const Scenario ed = load_scenario(data("eclipse_ddos.toml"));
    const Scenario selfish = load_scenario(data("selfish.toml"));
    const Scenario honest = load_scenario(data("honest_calibration.toml"));
    const double window = ed.detectors.eclipse_params.window + ed.detectors.sweep_period;

    int eclipse_hits = 0;
    int ddos_hits = 0;
    int selfish_hits = 0;
    double worst_eclipse = 0.0;
    double worst_ddos = 0.0;
    double ddos_rate = 0.0;
    std::uint64_t selfish_blocks_max = 0;
    int fp_eclipse = 0;
    int fp_ddos = 0;
    int fp_selfish = 0;
    for (std::uint64_t seed = 1; seed <= seeds; ++seed) {
        // Honest baseline first: it calibrates the flood rate and counts false positives.
        World base(honest, seed);
        base.run();
        for (const auto& f : base.flag_log()) {
            if (!f.node) continue;
            fp_eclipse += f.reason == "eclipse-victim";
            fp_ddos += f.reason == "ddos-source";
            fp_selfish += f.reason == "selfish-group";
        }

        Scenario sc = ed;
        const double rate = 100.0 * honest_message_rate(base, 0);
        ddos_rate = std::max(ddos_rate, rate);
        for (auto& a : sc.attacks) {
            if (a.spec.kind == chain::AttackKind::Ddos) a.spec.rate = rate;
        }
        World w(sc, seed);
        w.run();
        if (auto t = w.first_flag(0, 3, sentinel::FlagReason::EclipseVictim); t && *t - 600.0 <= window) {
            ++eclipse_hits;
            worst_eclipse = std::max(worst_eclipse, *t - 600.0);
        }
        if (auto t = w.first_flag(0, 5, sentinel::FlagReason::DdosSource)) {
            ++ddos_hits;
            worst_ddos = std::max(worst_ddos, *t - 900.0);
        }
        for (const auto& f : w.flag_log()) {
            if (f.node && *f.node != 3 && *f.node != 5 && f.chain == 0 &&
                (f.reason == "eclipse-victim" || f.reason == "ddos-source")) {
                v.require(false, "seed " + std::to_string(seed) + ": node " + std::to_string(*f.node) + " wrongly " +
                                     f.reason);
            }
        }

        World s(selfish, seed);
        s.run();
        if (auto t = s.first_flag(0, 0, sentinel::FlagReason::SelfishGroup)) {
            std::uint64_t blocks = 0;
            for (const auto& b : s.chain(0).mined_blocks()) blocks += b->timestamp <= *t ? 1 : 0;
            if (blocks <= 1000) ++selfish_hits;
            selfish_blocks_max = std::max(selfish_blocks_max, blocks);
        }
    }
    v.require(eclipse_hits == seeds, "eclipse " + std::to_string(eclipse_hits) + "/20");
    v.require(ddos_hits == seeds, "ddos " + std::to_string(ddos_hits) + "/20");
    v.require(selfish_hits >= 19, "selfish " + std::to_string(selfish_hits) + "/20");
    v.require(fp_eclipse == 0 && fp_ddos == 0, "honest eclipse/ddos flags " + std::to_string(fp_eclipse + fp_ddos));
    v.require(fp_selfish <= 1, "honest selfish flags " + std::to_string(fp_selfish));
    v.note("eclipse " + std::to_string(eclipse_hits) + "/20 (worst " + fmt9(worst_eclipse) + "s), ddos " +
           std::to_string(ddos_hits) + "/20 at <= " + fmt("%.2f", ddos_rate) + " msg/s (worst " + fmt9(worst_ddos) +
           "s), selfish " + std::to_string(selfish_hits) + "/20 (worst " + std::to_string(selfish_blocks_max) +
           " blocks), honest false positives " + std::to_string(fp_eclipse + fp_ddos) + "+" +
           std::to_string(fp_selfish));
    return v;
}

// 7. Exactly-once delivery through a relay crash and a connector leader crash.
Verdict fault_tolerance()
{
    Verdict v;
    const Scenario base = load_scenario(data("faults.toml"));
    int runs = 0;
    for (ChainId c = 0; c < base.chains.size(); ++c) {
        for (std::uint32_t r = 0; r < base.relays_per_chain; ++r) {
            Scenario sc = base;
            FaultScript relay_crash;
            relay_crash.kind = FaultKind::CrashRelay;
            relay_crash.at = 500.0;
            relay_crash.chain = c;
            relay_crash.relay = r;
            FaultScript leader_crash;
            leader_crash.kind = FaultKind::CrashConnectorLeader;
            leader_crash.at = 700.0;
            sc.faults = {relay_crash, leader_crash};
            World w(sc);
            w.run();
            const auto m = w.report();
            const std::string tag = sc.chain_name(c) + "/relay" + std::to_string(r) + ": ";
            v.require(m.scripted_delivered == m.scripted, tag + std::to_string(m.scripted_delivered) + "/" +
                                                              std::to_string(m.scripted) + " delivered");
            v.require(m.delivered == m.scripted, tag + "delivery count " + std::to_string(m.delivered));
            v.require(m.ledger_length == m.scripted, tag + "ledger length " + std::to_string(m.ledger_length));
            v.require(w.cluster().prefix_consistent(), tag + "ledger prefixes diverge");
            v.require(w.cluster().live_count() == 2, tag + "leader crash did not happen");
            v.require(m.violations.empty(), tag + (m.violations.empty() ? "" : m.violations.front()));
            ++runs;
        }
    }
    v.note(std::to_string(runs) + " crash placements, each " + std::to_string(base.traffic.size() * 60) +
           " transfers delivered exactly once");
    return v;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// 8. Byte-identical artifacts for repeated runs.
Verdict determinism()
{
    Verdict v;
    const fs::path root = fs::temp_directory_path() / "xchain-acceptance-determinism";
    fs::remove_all(root);
    int files = 0;
    for (const char* name : {"breaker.toml", "eclipse_ddos.toml", "minimal.toml"}) {
        const Scenario sc = load_scenario(data(name));
        for (int pass = 0; pass < 2; ++pass) {
            World w(sc);
            w.run();
            write_artifacts(w, w.report(), root / name / std::to_string(pass));
        }
        for (const auto& entry : fs::directory_iterator(root / name / "0")) {
            const auto other = root / name / "1" / entry.path().filename();
            v.require(slurp(entry.path()) == slurp(other), std::string(name) + ": " +
                                                              entry.path().filename().string() + " differs");
            ++files;
        }
    }
    v.require(files == 15, "expected 15 artifact files, compared " + std::to_string(files));
    fs::remove_all(root);
    v.note(std::to_string(files) + " artifact files identical across repeated runs");
    return v;
}

// 9. Scale smoke test.
Verdict scale()
{
    Verdict v;
    Stopwatch clock;
    World w(load_scenario(data("scale.toml")));
    w.run();
    const auto m = w.report();
    const double secs = clock.seconds();
    std::uint64_t blocks = 0;
    for (ChainId c = 0; c < 3; ++c) blocks += w.chain(c).mined_blocks().size();
    v.require(blocks >= 10000, "only " + std::to_string(blocks) + " blocks");
    v.require(m.delivered >= 1000, "only " + std::to_string(m.delivered) + " transfers delivered");
    v.require(m.violations.empty(), "invariant violations");
    v.require(secs < 60.0, "runtime " + fmt("%.1f", secs) + "s exceeds 60s");
    v.note(std::to_string(blocks) + " blocks, " + std::to_string(m.delivered) + " transfers, " +
           std::to_string(m.events) + " events in " + fmt("%.1f", secs) + "s");
    return v;
}

} // namespace

int main(int argc, char** argv)
{
    const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
        {"finality math vs Monte Carlo oracle", finality_vs_oracle},
        {"minimal-confirmation table vs oracle quantile search", min_confirmation_table},
        {"end-to-end security gate", security_gate},
        {"six-confirmation anchor", six_confirmation_anchor},
        {"circuit breaker", circuit_breaker},
        {"detector scenarios", detectors},
        {"fault tolerance", fault_tolerance},
        {"determinism", determinism},
        {"scale smoke test", scale},
    };
    std::set<int> selected;
    for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int n = static_cast<int>(i + 1);
        if (!selected.empty() && !selected.count(n)) continue;
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v.pass = false;
            v.detail = std::string("exception: ") + e.what();
        }
        failed += v.pass ? 0 : 1;
        std::printf("criterion %d (%s): %s - %s\n", n, criteria[i].first, v.pass ? "PASS" : "FAIL", v.detail.c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
