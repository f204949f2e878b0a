#pragma once

#include <cstdio>
#include <string>

namespace kacpf {

/// 17 significant digits: enough for an exact double round trip.
inline std::string csv_number(double value) {
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "%.17g", value);
    return buffer;
}

}  // namespace kacpf
