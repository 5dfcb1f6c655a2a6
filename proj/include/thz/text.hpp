#pragma once

#include <cstdio>
#include <string>

namespace thz {

// Fixed numeric formatting so every CSV/manifest byte is run-to-run stable.
inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

inline std::string fmt_double_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace thz
