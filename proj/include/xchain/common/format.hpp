#pragma once

#include <cstdio>
#include <string>

namespace xchain {

// Fixed 9-significant-digit rendering used by every artifact writer so that
// output files diff byte-for-byte across runs.
inline std::string fmt9(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

} // namespace xchain
