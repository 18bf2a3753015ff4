#pragma once

#include <cstdio>
#include <string>

namespace resonance {

/// Round-trip formatting used by every CSV writer.
inline std::string format_g17(double value)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

}  // namespace resonance
