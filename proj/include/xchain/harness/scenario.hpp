#pragma once

#include "xchain/chain/attacks.hpp"
#include "xchain/connector/types.hpp"
#include "xchain/finality/table.hpp"
#include "xchain/relay/relay_node.hpp"
#include "xchain/sentinel/sentinel.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace xchain::harness {

// Every problem found while loading a scenario, each prefixed with its line.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(std::vector<std::string> issues);
    const std::vector<std::string>& issues() const { return issues_; }

private:
    std::vector<std::string> issues_;
};

struct ChainConfig {
    chain::ChainSpec spec;
    std::optional<double> assumed_q; // floor on the adversary fraction fed to finality
    int line = 0;
};

struct TrafficScript {
    ChainId source = 0;
    ChainId dest = 0;
    std::uint64_t count = 0;
    double start = 0.0;
    double interval = 1.0;
    int line = 0;
};

struct AttackScript {
    chain::AttackSpec spec;
    bool hold_auto = false; // hold until the victim reaches the policy depth
    int line = 0;
};

enum class FaultKind : std::uint8_t {
    CrashRelay,
    RecoverRelay,
    CrashConnector,
    CrashConnectorLeader,
    RecoverConnector,
    ClearFlags,
};
const char* to_string(FaultKind k);

struct FaultScript {
    FaultKind kind = FaultKind::CrashRelay;
    double at = 0.0;
    ChainId chain = 0;
    std::uint32_t relay = 0;
    std::size_t connector = 0;
    std::vector<NodeId> nodes;
    int line = 0;
};

struct Scenario {
    std::uint64_t seed = 0;
    double duration = 0.0;
    std::size_t relays_per_chain = 1;
    double finality_period = 30.0;
    connector::ClusterConfig connector;
    relay::RelayConfig relay;
    sentinel::SentinelConfig detectors;
    std::vector<ChainConfig> chains;
    std::vector<finality::CollaborationPolicy> policies;
    std::vector<TrafficScript> traffic;
    std::vector<AttackScript> attacks;
    std::vector<FaultScript> faults;
    std::string out_dir;

    std::optional<ChainId> chain_id(std::string_view name) const;
    const std::string& chain_name(ChainId id) const { return chains.at(id).spec.name; }
    const finality::CollaborationPolicy* policy(ChainId source, ChainId dest) const;
};

Scenario parse_scenario(std::string_view text, const std::string& origin = "<input>");
Scenario load_scenario(const std::string& path);

} // namespace xchain::harness
