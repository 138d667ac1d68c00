#include "xchain/sentinel/sentinel.hpp"

#include <algorithm>

namespace xchain::sentinel {

namespace {

SelfishParams resolve(SelfishParams p, double median_latency)
{
    if (p.epsilon <= 0.0) p.epsilon = 2.0 * median_latency;
    return p;
}

} // namespace

Sentinel::Sentinel(ChainId chain, std::vector<double> shares, SentinelConfig config, double median_latency)
    : chain_(chain),
      shares_(std::move(shares)),
      config_(std::move(config)),
      flags_(chain),
      selfish_(resolve(config_.selfish_params, median_latency)),
      breaker_(circuit_breaker(chain, 0.0, config_.breaker_threshold))
{
    config_.ddos_params.window = config_.ddos_window;
}

void Sentinel::record_ping(NodeId node, sim::Time sent)
{
    if (started_ < 0.0) started_ = sent;
    heartbeat_.on_ping(node, sent);
}

void Sentinel::record_reply(const chain::HeartbeatReply& reply, sim::Time received)
{
    heartbeat_.on_reply(reply.node, reply.sent_at, received, config_.heartbeat_timeout);
    receptions_[reply.node].push_back(ReceptionSample{reply.replied_at, reply.blocks_received});
}

void Sentinel::record_message(NodeId from, sim::Time at)
{
    if (is_miner(from)) traffic_[from].push_back(at);
}

void Sentinel::record_block(const chain::Block& block, sim::Time arrival) { selfish_.observe(block, arrival); }

void Sentinel::record_growth(NodeId miner, sim::Time at) { growth_.push_back(GrowthSample{at, miner}); }

std::map<NodeId, double> Sentinel::traffic_rates(sim::Time now)
{
    std::map<NodeId, double> rates;
    for (NodeId n = 0; n < shares_.size(); ++n) {
        auto& q = traffic_[n];
        while (!q.empty() && q.front() <= now - config_.ddos_window) q.pop_front();
        rates[n] = static_cast<double>(q.size()) / config_.ddos_window;
    }
    return rates;
}

SweepReport Sentinel::sweep(sim::Time now)
{
    SweepReport report;
    auto flag_all = [&](const std::set<NodeId>& nodes, FlagReason reason) {
        for (NodeId n : nodes) {
            if (flags_.add(n, reason, now)) report.new_flags.push_back(FlagRecord{n, reason, now});
        }
    };
    if (config_.heartbeat) flag_all(heartbeat_.unresponsive(now, config_.heartbeat_timeout), FlagReason::Unresponsive);
    if (config_.eclipse && started_ >= 0.0 && now - started_ >= config_.eclipse_params.window) {
        flag_all(detect_eclipse(receptions_, growth_, now, config_.eclipse_params), FlagReason::EclipseVictim);
        // Samples older than two windows can no longer be the window start.
        const sim::Time horizon = now - 2.0 * config_.eclipse_params.window;
        for (auto& [node, samples] : receptions_) {
            auto keep = std::find_if(samples.begin(), samples.end(), [&](const auto& s) { return s.time > horizon; });
            if (keep != samples.begin() && keep != samples.end()) samples.erase(samples.begin(), keep - 1);
        }
        auto g = std::find_if(growth_.begin(), growth_.end(), [&](const auto& s) { return s.time > horizon; });
        growth_.erase(growth_.begin(), g);
    }
    if (config_.ddos && started_ >= 0.0 && now - started_ >= config_.ddos_window) {
        flag_all(detect_ddos(traffic_rates(now), config_.ddos_params), FlagReason::DdosSource);
    }
    if (config_.selfish) flag_all(selfish_.detect(), FlagReason::SelfishGroup);
    update_breaker(report);
    return report;
}

SweepReport Sentinel::clear(const std::vector<NodeId>& nodes, sim::Time)
{
    SweepReport report;
    for (NodeId n : nodes) {
        flags_.clear(n);
        heartbeat_.reset(n);
    }
    update_breaker(report);
    return report;
}

SweepReport Sentinel::force_flag(NodeId node, FlagReason reason, sim::Time now)
{
    SweepReport report;
    if (flags_.add(node, reason, now)) report.new_flags.push_back(FlagRecord{node, reason, now});
    update_breaker(report);
    return report;
}

void Sentinel::update_breaker(SweepReport& report)
{
    const double q = estimate_adversary(flags_, shares_);
    BreakerState next = circuit_breaker(chain_, q, config_.breaker_threshold);
    report.breaker_changed = next.open != breaker_.open;
    breaker_ = next;
    report.breaker = breaker_;
}

std::vector<NodeId> Sentinel::blacklist_candidates() const
{
    std::vector<NodeId> out;
    for (NodeId n : flags_.nodes()) {
        for (FlagReason r : config_.blacklist_reasons) {
            if (flags_.has(n, r)) {
                out.push_back(n);
                break;
            }
        }
    }
    return out;
}

} // namespace xchain::sentinel
