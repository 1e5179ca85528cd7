#include "dasim/harness/format.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

namespace dasim::harness {

std::string format_number(double x) {
    if (x == 0.0) return "0";  // folds -0
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

std::string format_number(const std::optional<double>& x) { return x ? format_number(*x) : std::string(); }

std::string format_fixed(double x, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, x);
    std::string s(buf);
    if (s == "-0" || s.find_first_not_of("-0.") == std::string::npos) s = decimals > 0 ? "0." + std::string(static_cast<std::size_t>(decimals), '0') : "0";
    return s;
}

}  // namespace dasim::harness
