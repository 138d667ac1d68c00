#include "xchain/chain/mempool.hpp"

namespace xchain::chain {

bool Mempool::insert(const TxPtr& tx)
{
    if (position_.count(tx->id)) return false;
    auto [it, fresh] = first_seen_.try_emplace(tx->id, next_);
    if (fresh) ++next_;
    queue_.emplace(it->second, tx);
    position_.emplace(tx->id, it->second);
    return true;
}

bool Mempool::erase(TxId id)
{
    auto it = position_.find(id);
    if (it == position_.end()) return false;
    queue_.erase(it->second);
    position_.erase(it);
    return true;
}

std::vector<TxPtr> Mempool::select(std::size_t capacity,
                                   const std::function<bool(const Tx&)>& skip) const
{
    std::vector<TxPtr> out;
    for (const auto& [pos, tx] : queue_) {
        if (out.size() >= capacity) break;
        if (skip && skip(*tx)) continue;
        out.push_back(tx);
    }
    return out;
}

} // namespace xchain::chain
