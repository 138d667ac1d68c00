#pragma once

#include "xchain/common/ids.hpp"
#include "xchain/sim/kernel.hpp"

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace xchain::chain {

enum class TxKind : std::uint8_t { Intra, Inter };

struct Tx {
    TxId id = 0;
    TxKind kind = TxKind::Intra;
    ChainId source = 0;
    ChainId dest = 0;
    std::string payload;
    sim::Time created = 0.0;
    // A double-spend marker: when a tx carrying this field sits on a node's
    // best chain, the referenced tx can no longer be included there.
    std::optional<TxId> conflicts_with;
};
using TxPtr = std::shared_ptr<const Tx>;

// Builds a tx and checks kind=inter <=> source != dest.
TxPtr make_tx(TxId id, ChainId source, ChainId dest, std::string payload, sim::Time created,
              std::optional<TxId> conflicts_with = std::nullopt);

struct Block {
    BlockId id = kNoBlock;
    BlockId parent = kNoBlock;
    std::uint64_t height = 0;
    NodeId miner = 0;
    sim::Time timestamp = 0.0;
    std::vector<TxPtr> txs;

    bool is_genesis() const { return parent == kNoBlock; }
};
using BlockPtr = std::shared_ptr<const Block>;

enum class LatencyModel : std::uint8_t { Constant, Uniform };

struct LatencySpec {
    LatencyModel model = LatencyModel::Uniform;
    double a = 0.1; // constant value, or lower bound
    double b = 0.5; // upper bound (uniform)

    double median() const { return model == LatencyModel::Constant ? a : 0.5 * (a + b); }
};

struct ChainSpec {
    ChainId id = 0;
    std::string name;
    std::vector<double> shares;   // hash-power share per miner
    double block_interval = 10.0; // target mean T, seconds
    LatencySpec latency;
    std::size_t block_capacity = 100;
    double intra_tx_rate = 0.0; // background intra-chain txs per second

    std::size_t miner_count() const { return shares.size(); }
};

class SpecError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Throws SpecError on share vectors outside [0,1] or not summing to 1.
void validate(const ChainSpec& spec);

} // namespace xchain::chain

namespace xchain::chain {

// Run-wide unique tx id source shared by every chain.
class TxIdAllocator {
public:
    TxId next() { return ++last_; }

private:
    TxId last_ = 0;
};

} // namespace xchain::chain
