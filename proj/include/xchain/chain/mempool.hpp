#pragma once

#include "xchain/chain/types.hpp"

#include <functional>
#include <map>
#include <unordered_map>
#include <vector>

namespace xchain::chain {

// FIFO pool of pending txs. A tx that leaves and re-enters (reorg return)
// keeps its original position.
class Mempool {
public:
    bool insert(const TxPtr& tx);
    bool erase(TxId id);
    bool contains(TxId id) const { return position_.count(id) != 0; }
    std::size_t size() const { return queue_.size(); }

    // Oldest-first selection of up to `capacity` txs for which `skip` is false.
    std::vector<TxPtr> select(std::size_t capacity,
                              const std::function<bool(const Tx&)>& skip = {}) const;

private:
    std::map<std::uint64_t, TxPtr> queue_;
    std::unordered_map<TxId, std::uint64_t> position_;
    std::unordered_map<TxId, std::uint64_t> first_seen_;
    std::uint64_t next_ = 0;
};

} // namespace xchain::chain
