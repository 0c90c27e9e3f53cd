#include "echolock/number_format.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <stdexcept>

namespace echolock {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), res.ptr);
}

std::string format_fixed(double value, int digits) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value,
                                 std::chars_format::fixed, digits);
  if (res.ec != std::errc()) return format_double(value);
  std::string out(buf.data(), res.ptr);
  if (out.find_first_not_of("-0.") == std::string::npos) {
    out.erase(0, out.front() == '-' ? 1 : 0);  // no "-0.00"
  }
  return out;
}

double parse_double(std::string_view text) {
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (first != last && *first == '+') ++first;
  double value = 0.0;
  const auto res = std::from_chars(first, last, value);
  if (first == last || res.ec != std::errc() || res.ptr != last) {
    throw std::invalid_argument("not a number: '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace echolock
