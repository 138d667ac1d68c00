#include "xchain/harness/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace xchain::harness {

ValidationError::ValidationError(std::vector<std::string> issues)
    : std::runtime_error([&] {
          std::string msg = "invalid scenario:";
          for (const auto& i : issues) msg += "\n  " + i;
          return msg;
      }()),
      issues_(std::move(issues))
{
}

const char* to_string(FaultKind k)
{
    switch (k) {
    case FaultKind::CrashRelay: return "crash-relay";
    case FaultKind::RecoverRelay: return "recover-relay";
    case FaultKind::CrashConnector: return "crash-connector";
    case FaultKind::CrashConnectorLeader: return "crash-connector-leader";
    case FaultKind::RecoverConnector: return "recover-connector";
    case FaultKind::ClearFlags: return "clear-flags";
    }
    return "unknown";
}

std::optional<ChainId> Scenario::chain_id(std::string_view name) const
{
    for (const auto& c : chains) {
        if (c.spec.name == name) return c.spec.id;
    }
    return std::nullopt;
}

const finality::CollaborationPolicy* Scenario::policy(ChainId source, ChainId dest) const
{
    for (const auto& p : policies) {
        if (p.source == source && p.dest == dest) return &p;
    }
    return nullptr;
}

namespace {

struct Entry {
    std::string key;
    std::string value;
    int line;
};

struct Section {
    std::string kind; // scenario, chain, policy, traffic, attack, fault, ...
    std::vector<std::string> args;
    int line;
    std::vector<Entry> entries;
};

std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep)
{
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
        const auto next = s.find(sep, pos);
        out.push_back(trim(s.substr(pos, next == std::string_view::npos ? s.npos : next - pos)));
        if (next == std::string_view::npos) break;
        pos = next + 1;
    }
    return out;
}

std::vector<std::string> words(std::string_view s)
{
    std::vector<std::string> out;
    std::istringstream in{std::string(s)};
    for (std::string w; in >> w;) out.push_back(w);
    return out;
}

bool valid_name(std::string_view n)
{
    return !n.empty() && std::all_of(n.begin(), n.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
    });
}

class Loader {
public:
    explicit Loader(std::string origin) : origin_(std::move(origin)) {}

    Scenario load(std::string_view text)
    {
        split_sections(text);
        declare_chains();
        for (const auto& s : sections_) interpret(s);
        finish();
        if (!issues_.empty()) throw ValidationError(issues_);
        return std::move(sc_);
    }

private:
    void issue(int line, const std::string& msg)
    {
        issues_.push_back(origin_ + ":" + std::to_string(line) + ": " + msg);
    }

    void split_sections(std::string_view text)
    {
        int line_no = 0;
        std::size_t pos = 0;
        while (pos <= text.size()) {
            const auto nl = text.find('\n', pos);
            std::string raw(text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos));
            pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
            ++line_no;
            if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
            const std::string line = trim(raw);
            if (line.empty()) continue;
            if (line.rfind("[[", 0) == 0) {
                if (line.size() < 4 || line.substr(line.size() - 2) != "]]") {
                    issue(line_no, "malformed table header '" + line + "'");
                    continue;
                }
                const std::string name = trim(line.substr(2, line.size() - 4));
                if (name != "attack" && name != "fault") {
                    issue(line_no, "unknown table '[[" + name + "]]'");
                    sections_.push_back(Section{"ignored", {}, line_no, {}});
                    continue;
                }
                sections_.push_back(Section{name, {}, line_no, {}});
                continue;
            }
            if (line.front() == '[') {
                if (line.back() != ']') {
                    issue(line_no, "malformed section header '" + line + "'");
                    continue;
                }
                auto parts = words(line.substr(1, line.size() - 2));
                if (parts.empty()) {
                    issue(line_no, "empty section header");
                    continue;
                }
                Section s{parts.front(), {parts.begin() + 1, parts.end()}, line_no, {}};
                static const std::set<std::string> known{"scenario", "connector", "relay", "detectors",
                                                         "output",   "chain",     "policy", "traffic"};
                if (!known.count(s.kind)) {
                    issue(line_no, "unknown section '[" + s.kind + "]'");
                    s.kind = "ignored";
                }
                sections_.push_back(std::move(s));
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos) {
                issue(line_no, "expected 'key = value', got '" + line + "'");
                continue;
            }
            if (sections_.empty()) {
                issue(line_no, "key outside of any section");
                continue;
            }
            Entry e{trim(line.substr(0, eq)), trim(line.substr(eq + 1)), line_no};
            auto& entries = sections_.back().entries;
            if (std::any_of(entries.begin(), entries.end(), [&](const Entry& o) { return o.key == e.key; })) {
                issue(line_no, "duplicate key '" + e.key + "'");
                continue;
            }
            entries.push_back(std::move(e));
        }
    }

    // Chain names must be known before policies and scripts refer to them.
    void declare_chains()
    {
        for (const auto& s : sections_) {
            if (s.kind != "chain") continue;
            if (s.args.size() != 1 || !valid_name(s.args[0])) {
                issue(s.line, "chain section needs one name: [chain NAME]");
                continue;
            }
            if (names_.count(s.args[0])) {
                issue(s.line, "duplicate chain '" + s.args[0] + "'");
                continue;
            }
            const auto id = static_cast<ChainId>(sc_.chains.size());
            names_[s.args[0]] = id;
            ChainConfig c;
            c.spec.id = id;
            c.spec.name = s.args[0];
            c.line = s.line;
            sc_.chains.push_back(std::move(c));
        }
    }

    // ---- value parsing ----

    std::optional<double> number(const Entry& e)
    {
        double v = 0.0;
        const char* b = e.value.data();
        const char* end = b + e.value.size();
        auto [p, ec] = std::from_chars(b, end, v);
        if (ec != std::errc() || p != end || !std::isfinite(v)) {
            issue(e.line, "'" + e.key + "' expects a number, got '" + e.value + "'");
            return std::nullopt;
        }
        return v;
    }

    std::optional<double> positive(const Entry& e)
    {
        auto v = number(e);
        if (v && *v <= 0.0) {
            issue(e.line, "'" + e.key + "' must be positive");
            return std::nullopt;
        }
        return v;
    }

    std::optional<double> non_negative(const Entry& e)
    {
        auto v = number(e);
        if (v && *v < 0.0) {
            issue(e.line, "'" + e.key + "' must not be negative");
            return std::nullopt;
        }
        return v;
    }

    std::optional<std::uint64_t> integer(const Entry& e)
    {
        std::uint64_t v = 0;
        const char* b = e.value.data();
        const char* end = b + e.value.size();
        auto [p, ec] = std::from_chars(b, end, v);
        if (ec != std::errc() || p != end) {
            issue(e.line, "'" + e.key + "' expects a non-negative integer, got '" + e.value + "'");
            return std::nullopt;
        }
        return v;
    }

    std::optional<ChainId> chain_ref(const Entry& e)
    {
        auto it = names_.find(e.value);
        if (it == names_.end()) {
            issue(e.line, "unknown chain '" + e.value + "'");
            return std::nullopt;
        }
        return it->second;
    }

    std::vector<NodeId> node_list(const Entry& e)
    {
        std::vector<NodeId> out;
        for (const auto& part : split(e.value, ',')) {
            Entry one{e.key, part, e.line};
            if (auto v = integer(one)) out.push_back(static_cast<NodeId>(*v));
        }
        return out;
    }

    template <class Fn>
    void each(const Section& s, const std::map<std::string, Fn>& handlers)
    {
        for (const auto& e : s.entries) {
            auto it = handlers.find(e.key);
            if (it == handlers.end()) {
                issue(e.line, "unknown key '" + e.key + "' in [" + s.kind + "]");
                continue;
            }
            it->second(e);
        }
    }

    bool has(const Section& s, std::string_view key) const
    {
        return std::any_of(s.entries.begin(), s.entries.end(), [&](const Entry& e) { return e.key == key; });
    }

    using Handler = std::function<void(const Entry&)>;

    // Pair header: [policy A -> B]
    std::optional<std::pair<ChainId, ChainId>> pair_header(const Section& s)
    {
        if (s.args.size() != 3 || s.args[1] != "->") {
            issue(s.line, "expected [" + s.kind + " SOURCE -> DEST]");
            return std::nullopt;
        }
        auto a = names_.find(s.args[0]);
        auto b = names_.find(s.args[2]);
        bool ok = true;
        if (a == names_.end()) {
            issue(s.line, "unknown chain '" + s.args[0] + "'");
            ok = false;
        }
        if (b == names_.end()) {
            issue(s.line, "unknown chain '" + s.args[2] + "'");
            ok = false;
        }
        if (!ok) return std::nullopt;
        if (a->second == b->second) {
            issue(s.line, "source and destination must differ");
            return std::nullopt;
        }
        return std::pair{a->second, b->second};
    }

    // ---- sections ----

    void interpret(const Section& s)
    {
        if (s.kind == "scenario") scenario(s);
        else if (s.kind == "connector") connector(s);
        else if (s.kind == "relay") relay(s);
        else if (s.kind == "detectors") detectors(s);
        else if (s.kind == "output") output(s);
        else if (s.kind == "chain") chain(s);
        else if (s.kind == "policy") policy(s);
        else if (s.kind == "traffic") traffic(s);
        else if (s.kind == "attack") attack(s);
        else if (s.kind == "fault") fault(s);
    }

    void scenario(const Section& s)
    {
        if (seen_scenario_) issue(s.line, "duplicate [scenario] section");
        seen_scenario_ = true;
        scenario_line_ = s.line;
        each<Handler>(s, {
            {"seed", [&](const Entry& e) { if (auto v = integer(e)) { sc_.seed = *v; has_seed_ = true; } }},
            {"duration", [&](const Entry& e) { if (auto v = positive(e)) { sc_.duration = *v; has_duration_ = true; } }},
            {"relays_per_chain", [&](const Entry& e) {
                 if (auto v = integer(e)) {
                     if (*v == 0) issue(e.line, "relays_per_chain must be at least 1");
                     else sc_.relays_per_chain = *v;
                 }
             }},
            {"finality_period", [&](const Entry& e) { if (auto v = positive(e)) sc_.finality_period = *v; }},
        });
    }

    void connector(const Section& s)
    {
        auto& c = sc_.connector;
        each<Handler>(s, {
            {"nodes", [&](const Entry& e) {
                 if (auto v = integer(e)) {
                     if (*v == 0) issue(e.line, "connector needs at least one node");
                     else c.nodes = *v;
                 }
             }},
            {"election_timeout_min", [&](const Entry& e) { if (auto v = positive(e)) c.election_timeout_min = *v; }},
            {"election_timeout_max", [&](const Entry& e) { if (auto v = positive(e)) c.election_timeout_max = *v; }},
            {"heartbeat_interval", [&](const Entry& e) { if (auto v = positive(e)) c.heartbeat_interval = *v; }},
            {"latency_min", [&](const Entry& e) { if (auto v = non_negative(e)) c.latency_min = *v; }},
            {"latency_max", [&](const Entry& e) { if (auto v = non_negative(e)) c.latency_max = *v; }},
            {"client_timeout", [&](const Entry& e) { if (auto v = positive(e)) c.client_timeout = *v; }},
        });
        if (c.election_timeout_min > c.election_timeout_max) issue(s.line, "election_timeout_min exceeds max");
        if (c.latency_min > c.latency_max) issue(s.line, "latency_min exceeds latency_max");
    }

    void relay(const Section& s)
    {
        auto& r = sc_.relay;
        each<Handler>(s, {
            {"poll_period", [&](const Entry& e) { if (auto v = positive(e)) r.poll_period = *v; }},
            {"stats_period", [&](const Entry& e) { if (auto v = positive(e)) r.stats_period = *v; }},
            {"stats_window", [&](const Entry& e) {
                 if (auto v = integer(e)) {
                     if (*v == 0) issue(e.line, "stats_window must be at least 1");
                     else r.stats_window = *v;
                 }
             }},
            {"retry_initial", [&](const Entry& e) { if (auto v = positive(e)) r.retry_initial = *v; }},
            {"retry_cap", [&](const Entry& e) { if (auto v = positive(e)) r.retry_cap = *v; }},
        });
    }

    std::optional<sentinel::FlagReason> reason(const Entry& e, const std::string& text)
    {
        using R = sentinel::FlagReason;
        for (R r : {R::Unresponsive, R::EclipseVictim, R::DdosSource, R::SelfishGroup}) {
            if (text == sentinel::to_string(r)) return r;
        }
        issue(e.line, "unknown flag reason '" + text + "'");
        return std::nullopt;
    }

    void detectors(const Section& s)
    {
        auto& d = sc_.detectors;
        each<Handler>(s, {
            {"sweep_period", [&](const Entry& e) { if (auto v = positive(e)) d.sweep_period = *v; }},
            {"heartbeat_timeout", [&](const Entry& e) { if (auto v = positive(e)) d.heartbeat_timeout = *v; }},
            {"eclipse_window", [&](const Entry& e) { if (auto v = positive(e)) d.eclipse_params.window = *v; }},
            {"eclipse_k", [&](const Entry& e) { if (auto v = integer(e)) d.eclipse_params.k = *v; }},
            {"ddos_window", [&](const Entry& e) { if (auto v = positive(e)) d.ddos_window = *v; }},
            {"ddos_k_sigma", [&](const Entry& e) { if (auto v = positive(e)) d.ddos_params.k_sigma = *v; }},
            {"ddos_min_rate", [&](const Entry& e) { if (auto v = non_negative(e)) d.ddos_params.min_rate = *v; }},
            {"selfish_window", [&](const Entry& e) {
                 if (auto v = integer(e)) {
                     if (*v == 0) issue(e.line, "selfish_window must be at least 1");
                     else d.selfish_params.window = *v;
                 }
             }},
            {"selfish_theta", [&](const Entry& e) { if (auto v = non_negative(e)) d.selfish_params.theta = *v; }},
            {"selfish_epsilon", [&](const Entry& e) { if (auto v = non_negative(e)) d.selfish_params.epsilon = *v; }},
            {"breaker_threshold", [&](const Entry& e) {
                 if (auto v = number(e)) {
                     if (!(*v > 0.0 && *v <= 0.5)) issue(e.line, "breaker_threshold must lie in (0, 0.5]");
                     else d.breaker_threshold = *v;
                 }
             }},
            {"blacklist", [&](const Entry& e) {
                 d.blacklist_reasons.clear();
                 if (e.value == "none") return;
                 for (const auto& part : split(e.value, ',')) {
                     if (auto r = reason(e, part)) d.blacklist_reasons.insert(*r);
                 }
             }},
            {"enable", [&](const Entry& e) {
                 d.heartbeat = d.eclipse = d.ddos = d.selfish = false;
                 if (e.value == "none") return;
                 for (const auto& part : split(e.value, ',')) {
                     if (part == "heartbeat") d.heartbeat = true;
                     else if (part == "eclipse") d.eclipse = true;
                     else if (part == "ddos") d.ddos = true;
                     else if (part == "selfish") d.selfish = true;
                     else issue(e.line, "unknown detector '" + part + "'");
                 }
             }},
        });
    }

    void output(const Section& s)
    {
        each<Handler>(s, {{"dir", [&](const Entry& e) { sc_.out_dir = e.value; }}});
    }

    void chain(const Section& s)
    {
        if (s.args.size() != 1) return; // reported in declare_chains
        auto it = names_.find(s.args[0]);
        if (it == names_.end()) return;
        ChainConfig& c = sc_.chains[it->second];
        if (c.line != s.line) return; // duplicate section, already reported
        auto& spec = c.spec;
        each<Handler>(s, {
            {"shares", [&](const Entry& e) {
                 for (const auto& part : split(e.value, ',')) {
                     Entry one{e.key, part, e.line};
                     if (auto v = number(one)) spec.shares.push_back(*v);
                 }
             }},
            {"miners", [&](const Entry& e) {
                 if (auto v = integer(e)) {
                     if (*v == 0) issue(e.line, "miners must be at least 1");
                     else spec.shares.assign(*v, 1.0 / static_cast<double>(*v));
                 }
             }},
            {"block_interval", [&](const Entry& e) { if (auto v = number(e)) spec.block_interval = *v; }},
            {"latency", [&](const Entry& e) {
                 auto w = words(e.value);
                 auto num = [&](const std::string& t) { return number(Entry{e.key, t, e.line}); };
                 if (w.size() == 2 && w[0] == "constant") {
                     if (auto a = num(w[1])) spec.latency = chain::LatencySpec{chain::LatencyModel::Constant, *a, *a};
                 } else if (w.size() == 3 && w[0] == "uniform") {
                     auto a = num(w[1]);
                     auto b = num(w[2]);
                     if (a && b) spec.latency = chain::LatencySpec{chain::LatencyModel::Uniform, *a, *b};
                 } else {
                     issue(e.line, "latency expects 'constant X' or 'uniform LO HI'");
                 }
             }},
            {"capacity", [&](const Entry& e) { if (auto v = integer(e)) spec.block_capacity = *v; }},
            {"intra_tx_rate", [&](const Entry& e) { if (auto v = non_negative(e)) spec.intra_tx_rate = *v; }},
            {"assumed_q", [&](const Entry& e) {
                 if (auto v = number(e)) {
                     if (*v < 0.0 || *v > 1.0) issue(e.line, "assumed_q must lie in [0, 1]");
                     else c.assumed_q = *v;
                 }
             }},
        });
        if (has(s, "shares") && has(s, "miners")) issue(s.line, "give either 'shares' or 'miners', not both");
        if (spec.shares.empty()) {
            issue(s.line, "chain '" + spec.name + "' has no miners (set 'shares' or 'miners')");
            return;
        }
        try {
            chain::validate(spec);
        } catch (const chain::SpecError& err) {
            issue(s.line, err.what());
        }
    }

    void policy(const Section& s)
    {
        auto pair = pair_header(s);
        std::optional<double> eps;
        each<Handler>(s, {
            {"epsilon", [&](const Entry& e) {
                 if (auto label = finality::epsilon_for_label(e.value)) {
                     eps = *label;
                 } else if (auto v = number(e)) {
                     if (!(*v > 0.0 && *v < 1.0)) issue(e.line, "epsilon must lie in (0, 1)");
                     else eps = *v;
                 }
             }},
        });
        if (!has(s, "epsilon")) issue(s.line, "policy needs 'epsilon' (a probability or HIGH/MED/LOW)");
        if (!pair || !eps) return;
        if (sc_.policy(pair->first, pair->second)) {
            issue(s.line, "duplicate policy " + s.args[0] + " -> " + s.args[2]);
            return;
        }
        sc_.policies.push_back(finality::CollaborationPolicy{pair->first, pair->second, *eps});
    }

    void traffic(const Section& s)
    {
        auto pair = pair_header(s);
        TrafficScript t;
        t.line = s.line;
        each<Handler>(s, {
            {"count", [&](const Entry& e) { if (auto v = integer(e)) t.count = *v; }},
            {"start", [&](const Entry& e) { if (auto v = non_negative(e)) t.start = *v; }},
            {"interval", [&](const Entry& e) { if (auto v = positive(e)) t.interval = *v; }},
        });
        if (!has(s, "count")) issue(s.line, "traffic needs 'count'");
        if (!pair) return;
        t.source = pair->first;
        t.dest = pair->second;
        sc_.traffic.push_back(t);
    }

    void attack(const Section& s)
    {
        AttackScript a;
        a.line = s.line;
        auto& spec = a.spec;
        bool kind_ok = false;
        bool chain_ok = false;
        std::optional<ChainId> victim;
        each<Handler>(s, {
            {"kind", [&](const Entry& e) {
                 if (auto k = chain::parse_attack_kind(e.value)) {
                     spec.kind = *k;
                     kind_ok = true;
                 } else {
                     issue(e.line, "unknown attack kind '" + e.value + "'");
                 }
             }},
            {"chain", [&](const Entry& e) {
                 if (auto c = chain_ref(e)) {
                     spec.chain = *c;
                     chain_ok = true;
                 }
             }},
            {"nodes", [&](const Entry& e) { spec.nodes = node_list(e); }},
            {"start", [&](const Entry& e) { if (auto v = non_negative(e)) spec.start = *v; }},
            {"stop", [&](const Entry& e) { if (auto v = non_negative(e)) spec.stop = *v; }},
            {"rate", [&](const Entry& e) { if (auto v = positive(e)) spec.rate = *v; }},
            {"victim", [&](const Entry& e) { victim = chain_ref(e); }},
            {"hold", [&](const Entry& e) {
                 if (e.value == "auto") a.hold_auto = true;
                 else if (auto v = integer(e)) spec.hold_depth = *v;
             }},
            {"max_deficit", [&](const Entry& e) {
                 if (auto v = integer(e)) {
                     if (*v == 0) issue(e.line, "max_deficit must be at least 1");
                     else spec.max_deficit = *v;
                 }
             }},
        });
        if (!has(s, "kind")) issue(s.line, "attack needs 'kind'");
        if (!has(s, "chain")) issue(s.line, "attack needs 'chain'");
        if (!has(s, "nodes")) issue(s.line, "attack needs 'nodes'");
        if (!kind_ok || !chain_ok) return;
        if (spec.stop < spec.start) issue(s.line, "attack stops before it starts");
        const auto& shares = sc_.chains[spec.chain].spec.shares;
        for (NodeId n : spec.nodes) {
            if (n >= shares.size()) issue(s.line, "node " + std::to_string(n) + " is not a miner of the chain");
        }
        if (spec.kind == chain::AttackKind::Ddos && spec.rate <= 0.0) issue(s.line, "ddos attack needs 'rate'");
        if (spec.kind == chain::AttackKind::DoubleSpend) {
            if (!victim) {
                issue(s.line, "double-spend needs 'victim' (destination chain)");
                return;
            }
            if (*victim == spec.chain) {
                issue(s.line, "double-spend victim must be another chain");
                return;
            }
            spec.victim_dest = *victim;
            double_spends_.push_back(a);
        }
        sc_.attacks.push_back(std::move(a));
    }

    void fault(const Section& s)
    {
        FaultScript f;
        f.line = s.line;
        bool kind_ok = false;
        each<Handler>(s, {
            {"kind", [&](const Entry& e) {
                 for (auto k : {FaultKind::CrashRelay, FaultKind::RecoverRelay, FaultKind::CrashConnector,
                                FaultKind::CrashConnectorLeader, FaultKind::RecoverConnector, FaultKind::ClearFlags}) {
                     if (e.value == to_string(k)) {
                         f.kind = k;
                         kind_ok = true;
                     }
                 }
                 if (!kind_ok) issue(e.line, "unknown fault kind '" + e.value + "'");
             }},
            {"at", [&](const Entry& e) { if (auto v = non_negative(e)) f.at = *v; }},
            {"chain", [&](const Entry& e) { if (auto c = chain_ref(e)) f.chain = *c; }},
            {"relay", [&](const Entry& e) { if (auto v = integer(e)) f.relay = static_cast<std::uint32_t>(*v); }},
            {"connector", [&](const Entry& e) { if (auto v = integer(e)) f.connector = *v; }},
            {"nodes", [&](const Entry& e) { f.nodes = node_list(e); }},
        });
        if (!has(s, "kind")) issue(s.line, "fault needs 'kind'");
        if (!has(s, "at")) issue(s.line, "fault needs 'at'");
        if (!kind_ok) return;
        const bool needs_chain =
            f.kind == FaultKind::CrashRelay || f.kind == FaultKind::RecoverRelay || f.kind == FaultKind::ClearFlags;
        if (needs_chain && !has(s, "chain")) issue(s.line, std::string(to_string(f.kind)) + " needs 'chain'");
        sc_.faults.push_back(std::move(f));
    }

    void finish()
    {
        if (!seen_scenario_) issue(1, "missing [scenario] section");
        else {
            if (!has_seed_) issue(scenario_line_, "[scenario] needs 'seed'");
            if (!has_duration_) issue(scenario_line_, "[scenario] needs 'duration'");
        }
        if (sc_.chains.empty()) issue(1, "no [chain] sections");
        for (const auto& t : sc_.traffic) {
            if (!sc_.policy(t.source, t.dest)) {
                issue(t.line, "missing collaboration policy for " + sc_.chain_name(t.source) + " -> " +
                                  sc_.chain_name(t.dest));
            }
        }
        for (const auto& a : double_spends_) {
            if (!sc_.policy(a.spec.chain, a.spec.victim_dest)) {
                issue(a.line, "missing collaboration policy for " + sc_.chain_name(a.spec.chain) + " -> " +
                                  sc_.chain_name(a.spec.victim_dest));
            }
        }
        for (const auto& f : sc_.faults) {
            const bool relay_fault = f.kind == FaultKind::CrashRelay || f.kind == FaultKind::RecoverRelay;
            if (relay_fault && f.relay >= sc_.relays_per_chain) {
                issue(f.line, "relay " + std::to_string(f.relay) + " does not exist");
            }
            const bool conn_fault = f.kind == FaultKind::CrashConnector || f.kind == FaultKind::RecoverConnector;
            if (conn_fault && f.connector >= sc_.connector.nodes) {
                issue(f.line, "connector node " + std::to_string(f.connector) + " does not exist");
            }
        }
        if (sc_.relay.retry_initial > sc_.relay.retry_cap) issue(1, "retry_initial exceeds retry_cap");
    }

    std::string origin_;
    std::vector<std::string> issues_;
    std::vector<Section> sections_;
    std::map<std::string, ChainId> names_;
    std::vector<AttackScript> double_spends_;
    Scenario sc_;
    bool seen_scenario_ = false;
    bool has_seed_ = false;
    bool has_duration_ = false;
    int scenario_line_ = 0;
};

} // namespace

Scenario parse_scenario(std::string_view text, const std::string& origin) { return Loader(origin).load(text); }

Scenario load_scenario(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ValidationError({path + ": cannot open scenario file"});
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str(), path);
}

} // namespace xchain::harness
