#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace gridqcqp {

/// Locale-independent decimal parse of a whole token. Accepts the usual
/// floating forms plus Inf/-Inf/NaN in any letter case.
std::optional<double> parse_number(std::string_view token);

/// Shortest text that parses back to exactly `v`. Non-finite values are
/// written the MATLAB way: Inf, -Inf, NaN.
std::string format_number(double v);

/// Fixed-point rendering with `decimals` digits after the point.
std::string format_fixed(double v, int decimals);

}  // namespace gridqcqp
