#pragma once

#include <charconv>
#include <cmath>
#include <string>

namespace spibb::detail {

/// Shortest round-trip decimal representation ("2", "0.05", "nan", "inf").
inline std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return {buf, res.ptr};
}

}  // namespace spibb::detail
