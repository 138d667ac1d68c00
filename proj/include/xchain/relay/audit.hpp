#pragma once

#include "xchain/common/ids.hpp"
#include "xchain/sim/kernel.hpp"

#include <optional>
#include <vector>

namespace xchain::relay {

using RelayId = std::uint32_t;

enum class TransferState : std::uint8_t { Observed, Matured, Submitted, Committed, Delivered, Dropped };
const char* to_string(TransferState s);

// Observed->{Matured, Observed, Dropped}; Matured->{Submitted, Dropped};
// Submitted->Committed; Committed->Delivered. Dropped and Delivered are final.
bool legal_transition(TransferState from, TransferState to);

struct AuditRecord {
    sim::Time time = 0.0;
    RelayId relay = 0;
    ChainId chain = 0;
    TxId tx = 0;
    std::optional<TransferState> from; // empty for the initial observation
    TransferState to = TransferState::Observed;
    std::uint64_t depth = 0;
    std::optional<std::uint64_t> z;
};

class AuditLog {
public:
    void record(AuditRecord r) { records_.push_back(r); }
    const std::vector<AuditRecord>& records() const { return records_; }

private:
    std::vector<AuditRecord> records_;
};

} // namespace xchain::relay
