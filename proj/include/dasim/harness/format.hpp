#pragma once

#include <optional>
#include <string>

namespace dasim::harness {

/// Shortest decimal text that parses back to exactly `x`.
std::string format_number(double x);

/// Empty string for an absent value.
std::string format_number(const std::optional<double>& x);

/// Fixed-point text with `decimals` digits, for SVG coordinates.
std::string format_fixed(double x, int decimals = 2);

}  // namespace dasim::harness
