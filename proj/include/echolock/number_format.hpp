#pragma once

#include <string>
#include <string_view>

namespace echolock {

/// Shortest decimal that parses back to the identical double ('.' decimal
/// point, exponent form when shorter, locale independent).
std::string format_double(double value);

/// Fixed notation with `digits` after the point, locale independent.
std::string format_fixed(double value, int digits);

/// Strict parse of a complete decimal number; throws std::invalid_argument
/// on trailing garbage or an empty string.
double parse_double(std::string_view text);

}  // namespace echolock
