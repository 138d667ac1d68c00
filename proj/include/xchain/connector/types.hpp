#pragma once

#include "xchain/common/ids.hpp"
#include "xchain/sim/kernel.hpp"

#include <string>

namespace xchain::connector {

// A matured inter-chain transfer as recorded on the connector ledger.
struct InterChainTx {
    TxId id = 0;
    ChainId source = 0;
    ChainId dest = 0;
    std::string payload;
    BlockId origin_block = kNoBlock;
    sim::Time matured_at = 0.0;
};

struct LedgerEntry {
    std::uint64_t seq = 0; // consecutive from 1
    InterChainTx tx;
    sim::Time committed_at = 0.0;
};

enum class SubmitStatus : std::uint8_t { Committed, Timeout };

struct SubmitResult {
    SubmitStatus status = SubmitStatus::Timeout;
    std::uint64_t seq = 0;
};

struct ClusterConfig {
    std::size_t nodes = 3;
    double election_timeout_min = 1.5;
    double election_timeout_max = 3.0;
    double heartbeat_interval = 0.5;
    double latency_min = 0.01;
    double latency_max = 0.05;
    double client_timeout = 5.0;
    std::size_t max_batch = 64;
};

} // namespace xchain::connector
