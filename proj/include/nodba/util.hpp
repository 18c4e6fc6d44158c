#pragma once

#include <charconv>
#include <cmath>
#include <string>

namespace nodba {

/// True if `x` is an integer small enough to be represented exactly by both `double` and `int64_t`.
inline bool is_exact_integer(double x) { return std::isfinite(x) and std::floor(x) == x and std::fabs(x) < 0x1p53; }

/// Shortest decimal text that parses back to exactly `x`; exact integers are written without an exponent.
inline std::string format_number(double x)
{
    char buf[64];
    auto res = is_exact_integer(x) ? std::to_chars(buf, buf + sizeof buf, x, std::chars_format::fixed)
                                   : std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

}
