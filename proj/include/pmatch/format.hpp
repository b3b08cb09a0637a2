#pragma once

#include <charconv>
#include <cstdio>
#include <string>
#include <system_error>

namespace pmatch {

// Shortest representation that round-trips to the same double. Used for CSV
// and manifest output so repeated runs are byte-identical.
inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

// Fixed 17 significant digits, the cloud text format contract.
inline std::string format_double_17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
}

} // namespace pmatch
