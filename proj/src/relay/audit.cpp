#include "xchain/relay/audit.hpp"

namespace xchain::relay {

const char* to_string(TransferState s)
{
    switch (s) {
    case TransferState::Observed: return "Observed";
    case TransferState::Matured: return "Matured";
    case TransferState::Submitted: return "Submitted";
    case TransferState::Committed: return "Committed";
    case TransferState::Delivered: return "Delivered";
    case TransferState::Dropped: return "Dropped";
    }
    return "Unknown";
}

bool legal_transition(TransferState from, TransferState to)
{
    using S = TransferState;
    switch (from) {
    case S::Observed: return to == S::Matured || to == S::Observed || to == S::Dropped;
    case S::Matured: return to == S::Submitted || to == S::Dropped;
    case S::Submitted: return to == S::Committed;
    case S::Committed: return to == S::Delivered;
    case S::Delivered:
    case S::Dropped: return false;
    }
    return false;
}

} // namespace xchain::relay
