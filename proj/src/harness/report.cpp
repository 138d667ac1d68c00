#include "xchain/harness/report.hpp"

#include "xchain/common/format.hpp"

#include "json.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace xchain::harness {

namespace {

using nlohmann::ordered_json;

// Round-trips through the 9-digit text form so JSON numbers match the CSVs.
ordered_json num(double v)
{
    if (!std::isfinite(v)) return nullptr;
    return std::stod(fmt9(v));
}

void write_file(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

} // namespace

std::string metrics_csv(const MetricsReport& m)
{
    std::ostringstream out;
    out << "metric,scope,value\n";
    auto row = [&](const std::string& metric, const std::string& scope, const std::string& value) {
        out << metric << ',' << scope << ',' << value << '\n';
    };
    auto u = [](std::uint64_t v) { return std::to_string(v); };
    row("seed", "run", u(m.seed));
    row("duration", "run", fmt9(m.duration));
    row("events", "run", u(m.events));
    for (const auto& c : m.chains) {
        row("blocks_mined", c.name, u(c.mined));
        row("best_height", c.name, u(c.best_height));
        row("stale_blocks", c.name, u(c.stale));
        row("t_hat", c.name, fmt9(c.t_hat));
        row("q_est", c.name, fmt9(c.q_est));
        row("breaker_open", c.name, c.breaker_open ? "1" : "0");
    }
    row("scripted", "transfers", u(m.scripted));
    row("scripted_delivered", "transfers", u(m.scripted_delivered));
    row("observed", "transfers", u(m.observed));
    row("delivered", "transfers", u(m.delivered));
    row("dropped", "transfers", u(m.dropped));
    row("pending", "transfers", u(m.pending));
    row("ledger_length", "connector", u(m.ledger_length));
    const auto& l = m.delivery_latency;
    row("latency_count", "delivery", u(l.count));
    row("latency_mean", "delivery", fmt9(l.mean));
    row("latency_p50", "delivery", fmt9(l.p50));
    row("latency_p95", "delivery", fmt9(l.p95));
    row("latency_max", "delivery", fmt9(l.max));
    row("reversals", "transfers", u(m.reversals));
    row("reversed_after_delivery", "transfers", u(m.reversed_after_delivery));
    row("double_spend_attempts", "attacks", u(m.double_spend_attempts));
    row("double_spend_published", "attacks", u(m.double_spend_published));
    row("flag_events", "sentinel", u(m.flags.size()));
    row("breaker_episodes", "sentinel", u(m.breakers.size()));
    row("violations", "run", u(m.violations.size()));
    return out.str();
}

std::string summary_json(const MetricsReport& m)
{
    ordered_json j;
    j["seed"] = m.seed;
    j["duration"] = num(m.duration);
    j["events"] = m.events;
    auto& chains = j["chains"] = ordered_json::array();
    for (const auto& c : m.chains) {
        chains.push_back({{"name", c.name},
                          {"blocks_mined", c.mined},
                          {"best_height", c.best_height},
                          {"stale_blocks", c.stale},
                          {"t_hat", num(c.t_hat)},
                          {"q_est", num(c.q_est)},
                          {"breaker_open", c.breaker_open}});
    }
    j["transfers"] = {{"scripted", m.scripted},     {"scripted_delivered", m.scripted_delivered},
                      {"observed", m.observed},     {"delivered", m.delivered},
                      {"dropped", m.dropped},       {"pending", m.pending},
                      {"reversals", m.reversals},   {"reversed_after_delivery", m.reversed_after_delivery}};
    const auto& l = m.delivery_latency;
    j["delivery_latency"] = {{"count", l.count}, {"mean", num(l.mean)}, {"p50", num(l.p50)},
                             {"p95", num(l.p95)}, {"max", num(l.max)}};
    j["ledger_length"] = m.ledger_length;
    j["double_spend"] = {{"attempts", m.double_spend_attempts}, {"published", m.double_spend_published}};
    auto& flags = j["flags"] = ordered_json::array();
    for (const auto& f : m.flags) {
        ordered_json row{{"time", num(f.time)}, {"chain", m.chains.at(f.chain).name}};
        row["node"] = f.node ? ordered_json(*f.node) : ordered_json(nullptr);
        row["reason"] = f.reason;
        flags.push_back(std::move(row));
    }
    auto& breakers = j["breaker_episodes"] = ordered_json::array();
    for (const auto& b : m.breakers) {
        breakers.push_back({{"chain", m.chains.at(b.chain).name},
                            {"opened", num(b.opened)},
                            {"closed", b.closed ? num(*b.closed) : ordered_json(nullptr)}});
    }
    j["violations"] = m.violations;
    return j.dump(2) + "\n";
}

std::string transfers_csv(const relay::AuditLog& audit, const Scenario& sc)
{
    std::ostringstream out;
    out << "time,relay,chain,tx_id,from_state,to_state,depth,z\n";
    for (const auto& r : audit.records()) {
        out << fmt9(r.time) << ',' << r.relay << ',' << sc.chain_name(r.chain) << ',' << r.tx << ','
            << (r.from ? relay::to_string(*r.from) : "") << ',' << relay::to_string(r.to) << ',' << r.depth << ','
            << (r.z ? std::to_string(*r.z) : std::string()) << '\n';
    }
    return out.str();
}

std::string ledger_csv(const std::vector<connector::LedgerEntry>& ledger, const Scenario& sc)
{
    std::ostringstream out;
    out << "seq,tx_id,source,dest,committed_at\n";
    for (const auto& e : ledger) {
        out << e.seq << ',' << e.tx.id << ',' << sc.chain_name(e.tx.source) << ',' << sc.chain_name(e.tx.dest) << ','
            << fmt9(e.committed_at) << '\n';
    }
    return out.str();
}

std::string flags_csv(const std::vector<FlagEvent>& flags, const Scenario& sc)
{
    std::ostringstream out;
    out << "time,chain,node,reason,q_est,breaker\n";
    for (const auto& f : flags) {
        out << fmt9(f.time) << ',' << sc.chain_name(f.chain) << ',' << (f.node ? std::to_string(*f.node) : "")
            << ',' << f.reason << ',' << fmt9(f.q_est) << ',' << (f.breaker_open ? "open" : "closed") << '\n';
    }
    return out.str();
}

void write_artifacts(const World& world, const MetricsReport& m, const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    write_file(dir / "metrics.csv", metrics_csv(m));
    write_file(dir / "summary.json", summary_json(m));
    write_file(dir / "transfers.csv", transfers_csv(world.audit(), world.scenario()));
    write_file(dir / "ledger.csv", ledger_csv(world.cluster().committed(), world.scenario()));
    write_file(dir / "flags.csv", flags_csv(world.flag_log(), world.scenario()));
}

std::vector<MetricsReport> run_trials(const Scenario& sc, std::uint64_t base_seed, std::size_t trials,
                                      std::size_t threads)
{
    std::vector<MetricsReport> out(trials);
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, std::max<std::size_t>(trials, 1));
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < trials; i = next++) {
            World w(sc, base_seed + i);
            w.run();
            out[i] = w.report();
        }
    };
    if (threads <= 1) {
        worker();
        return out;
    }
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    return out;
}

std::string trials_csv(const std::vector<MetricsReport>& runs)
{
    std::ostringstream out;
    out << "trial,seed,observed,delivered,dropped,pending,reversals,reversed_after_delivery,"
           "double_spend_attempts,double_spend_published,ledger_length,violations\n";
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const auto& m = runs[i];
        out << i << ',' << m.seed << ',' << m.observed << ',' << m.delivered << ',' << m.dropped << ',' << m.pending
            << ',' << m.reversals << ',' << m.reversed_after_delivery << ',' << m.double_spend_attempts << ','
            << m.double_spend_published << ',' << m.ledger_length << ',' << m.violations.size() << '\n';
    }
    return out.str();
}

std::string batch_summary_json(const std::vector<MetricsReport>& runs)
{
    std::uint64_t observed = 0, delivered = 0, dropped = 0, pending = 0, reversed = 0, attempts = 0, published = 0,
                  violating = 0;
    for (const auto& m : runs) {
        observed += m.observed;
        delivered += m.delivered;
        dropped += m.dropped;
        pending += m.pending;
        reversed += m.reversed_after_delivery;
        attempts += m.double_spend_attempts;
        published += m.double_spend_published;
        violating += m.violations.empty() ? 0 : 1;
    }
    ordered_json j;
    j["trials"] = runs.size();
    j["first_seed"] = runs.empty() ? 0 : runs.front().seed;
    j["observed"] = observed;
    j["delivered"] = delivered;
    j["dropped"] = dropped;
    j["pending"] = pending;
    j["reversed_after_delivery"] = reversed;
    j["double_spend_attempts"] = attempts;
    j["double_spend_published"] = published;
    j["reversal_rate_per_attempt"] = attempts ? num(static_cast<double>(reversed) / static_cast<double>(attempts))
                                              : ordered_json(nullptr);
    j["trials_with_violations"] = violating;
    return j.dump(2) + "\n";
}

void write_batch(const std::vector<MetricsReport>& runs, const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    write_file(dir / "trials.csv", trials_csv(runs));
    write_file(dir / "summary.json", batch_summary_json(runs));
}

} // namespace xchain::harness
