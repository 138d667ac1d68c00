#pragma once

#include <cstdint>

namespace xchain {

using ChainId = std::uint32_t;
using NodeId = std::uint32_t; // index of a node within its chain's network
using TxId = std::uint64_t;
using BlockId = std::uint64_t;

inline constexpr BlockId kNoBlock = 0;

} // namespace xchain
