#pragma once

#include <cmath>
#include <cstdio>
#include <string>

namespace mixlab {

// Round-trip scientific notation, independent of stream state and locale.
inline std::string format_real(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17e", x);
    return buf;
}

}  // namespace mixlab
