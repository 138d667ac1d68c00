#include "xchain/sentinel/detectors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace xchain::sentinel {

const char* to_string(FlagReason r)
{
    switch (r) {
    case FlagReason::Unresponsive: return "unresponsive";
    case FlagReason::EclipseVictim: return "eclipse-victim";
    case FlagReason::DdosSource: return "ddos-source";
    case FlagReason::SelfishGroup: return "selfish-group";
    }
    return "unknown";
}

bool FlagSet::add(NodeId node, FlagReason reason, sim::Time time)
{
    if (!reasons_[node].insert(reason).second) return false;
    history_.push_back(FlagRecord{node, reason, time});
    return true;
}

void FlagSet::clear(NodeId node) { reasons_.erase(node); }

bool FlagSet::has(NodeId node, FlagReason reason) const
{
    auto it = reasons_.find(node);
    return it != reasons_.end() && it->second.count(reason) != 0;
}

std::set<NodeId> FlagSet::nodes() const
{
    std::set<NodeId> out;
    for (const auto& [node, reasons] : reasons_) {
        if (!reasons.empty()) out.insert(node);
    }
    return out;
}

double estimate_adversary(const FlagSet& flags, std::span<const double> shares)
{
    double q = 0.0;
    for (NodeId n : flags.nodes()) {
        if (n < shares.size()) q += shares[n];
    }
    return std::clamp(q, 0.0, 1.0);
}

void HeartbeatTracker::on_ping(NodeId node, sim::Time sent) { nodes_[node].outstanding.push_back(sent); }

void HeartbeatTracker::on_reply(NodeId node, sim::Time sent, sim::Time received, double timeout)
{
    auto& s = nodes_[node];
    auto it = std::find(s.outstanding.begin(), s.outstanding.end(), sent);
    if (it == s.outstanding.end()) return;
    // An answer also settles every older ping.
    s.outstanding.erase(s.outstanding.begin(), it + 1);
    if (received - sent > timeout) s.late = true;
}

std::set<NodeId> HeartbeatTracker::unresponsive(sim::Time now, double timeout) const
{
    std::set<NodeId> out;
    for (const auto& [node, s] : nodes_) {
        if (s.late || (!s.outstanding.empty() && now - s.outstanding.front() > timeout)) out.insert(node);
    }
    return out;
}

std::set<NodeId> detect_eclipse(const ReceptionLog& log, std::span<const GrowthSample> growth,
                                sim::Time now, const EclipseParams& params)
{
    std::set<NodeId> victims;
    for (const auto& [node, samples] : log) {
        if (samples.empty()) continue;
        const ReceptionSample& latest = samples.back();
        // Latest report at or before the window start.
        const ReceptionSample* old = nullptr;
        for (auto it = samples.rbegin(); it != samples.rend(); ++it) {
            if (it->time <= now - params.window) {
                old = &*it;
                break;
            }
        }
        if (!old || latest.received != old->received) continue;
        std::uint64_t others = 0;
        for (const auto& g : growth) {
            if (g.time > old->time && g.time <= latest.time - params.grace && g.miner != node) ++others;
        }
        if (others >= params.k) victims.insert(node);
    }
    return victims;
}

std::set<NodeId> detect_ddos(const std::map<NodeId, double>& rates, const DdosParams& params)
{
    std::set<NodeId> sources;
    if (rates.size() < 2) return sources;
    double total = 0.0;
    double total_sq = 0.0;
    for (const auto& [node, r] : rates) {
        total += r;
        total_sq += r * r;
    }
    const double others = static_cast<double>(rates.size() - 1);
    for (const auto& [node, r] : rates) {
        if (r <= params.min_rate) continue;
        const double mean = (total - r) / others;
        const double var = std::max(0.0, (total_sq - r * r) / others - mean * mean);
        double sd = std::sqrt(var);
        if (params.window > 0.0) sd = std::max(sd, std::sqrt(mean / params.window));
        const bool flagged = sd > 1e-12 * std::max(1.0, mean) ? r > mean + params.k_sigma * sd
                                                              : r > params.fallback_multiple * mean;
        if (flagged) sources.insert(node);
    }
    return sources;
}

void SelfishDetector::observe(const chain::Block& block, sim::Time arrival)
{
    if (block.is_genesis() || seen_.count(block.id)) return;
    auto& h = history_[block.miner];
    const std::size_t slot = h.burst.size();
    h.burst.push_back(false);
    seen_.emplace(block.id, Seen{block.miner, arrival, slot});

    children_.emplace(block.parent, block.id);

    auto pair_with = [&](const Seen& other) {
        if (other.miner == block.miner && std::abs(arrival - other.arrival) <= params_.epsilon) {
            mark(block.miner, slot);
            mark(block.miner, other.slot);
        }
    };
    if (auto parent = seen_.find(block.parent); parent != seen_.end()) pair_with(parent->second);
    // Children can arrive first when a release is reordered in flight.
    auto [lo, hi] = children_.equal_range(block.id);
    for (auto it = lo; it != hi; ++it) {
        if (auto child = seen_.find(it->second); child != seen_.end()) pair_with(child->second);
    }
}

void SelfishDetector::mark(NodeId miner, std::size_t slot) { history_[miner].burst[slot] = true; }

std::size_t SelfishDetector::published(NodeId miner) const
{
    auto it = history_.find(miner);
    return it == history_.end() ? 0 : it->second.burst.size();
}

double SelfishDetector::burst_fraction(NodeId miner) const
{
    auto it = history_.find(miner);
    if (it == history_.end() || it->second.burst.empty()) return 0.0;
    const auto& b = it->second.burst;
    const std::size_t n = std::min(params_.window, b.size());
    const auto bursts = std::count(b.end() - static_cast<std::ptrdiff_t>(n), b.end(), true);
    return static_cast<double>(bursts) / static_cast<double>(n);
}

std::set<NodeId> SelfishDetector::detect() const
{
    std::set<NodeId> out;
    for (const auto& [miner, h] : history_) {
        if (h.burst.size() < params_.window) continue;
        if (burst_fraction(miner) > params_.theta) out.insert(miner);
    }
    return out;
}

BreakerState circuit_breaker(ChainId chain, double q_est, double threshold)
{
    if (!(threshold > 0.0 && threshold <= 0.5)) throw std::invalid_argument("breaker threshold must lie in (0, 0.5]");
    return BreakerState{chain, q_est >= threshold, q_est, threshold};
}

} // namespace xchain::sentinel
