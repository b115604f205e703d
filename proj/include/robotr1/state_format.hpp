#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <string>
#include <string_view>

#include "robotr1/types.hpp"

namespace robotr1 {

/// One coordinate rounded half-away-from-zero to 3 decimals, always with
/// exactly three decimal places ("0.265", "-0.112", "1.000").
inline std::string format_coordinate(double value) {
  long long scaled = std::llround(value * 1000.0);  // llround rounds halves away from zero
  const bool negative = scaled < 0;
  unsigned long long magnitude =
      negative ? 0ull - static_cast<unsigned long long>(scaled) : static_cast<unsigned long long>(scaled);
  char buffer[48];
  std::snprintf(buffer, sizeof(buffer), "%s%llu.%03llu", negative ? "-" : "", magnitude / 1000,
                magnitude % 1000);
  return buffer;
}

/// Renders a state exactly as it appears in prompts and answer options:
/// "[x, y, z]" at 3 decimals.
inline std::string format_state(const Position3& p) {
  return "[" + format_coordinate(p.x) + ", " + format_coordinate(p.y) + ", " +
         format_coordinate(p.z) + "]";
}

inline Position3 round_to_display(const Position3& p) {
  return {std::llround(p.x * 1000.0) / 1000.0, std::llround(p.y * 1000.0) / 1000.0,
          std::llround(p.z * 1000.0) / 1000.0};
}

/// Shortest decimal rendering used for metadata constants in templates,
/// e.g. 0.25 -> "0.25", 0.0 -> "0".
inline std::string format_compact(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.6g", value);
  return buffer;
}

inline std::string format_state_compact(const Position3& p) {
  return "[" + format_compact(p.x) + ", " + format_compact(p.y) + ", " + format_compact(p.z) + "]";
}

namespace detail {

inline void skip_spaces(std::string_view text, std::size_t& pos) {
  while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
}

inline std::optional<double> parse_double(std::string_view text, std::size_t& pos) {
  skip_spaces(text, pos);
  const char* begin = text.data() + pos;
  const char* end = text.data() + text.size();
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr == begin) return std::nullopt;
  pos += static_cast<std::size_t>(ptr - begin);
  return value;
}

}  // namespace detail

/// Parses "[x, y, z]". Anything after the closing bracket is treated as a
/// comment and ignored ("[0.275, -0.009, 0.85] # move closer" parses).
/// Returns nullopt when the text is not a 3-vector.
inline std::optional<Position3> parse_state(std::string_view text) {
  std::size_t pos = 0;
  detail::skip_spaces(text, pos);
  if (pos >= text.size() || text[pos] != '[') return std::nullopt;
  ++pos;
  Position3 out;
  for (int axis = 0; axis < 3; ++axis) {
    auto value = detail::parse_double(text, pos);
    if (!value) return std::nullopt;
    out[axis] = *value;
    detail::skip_spaces(text, pos);
    if (axis < 2) {
      if (pos >= text.size() || text[pos] != ',') return std::nullopt;
      ++pos;
    }
  }
  if (pos >= text.size() || text[pos] != ']') return std::nullopt;
  return out;
}

inline std::string trim(std::string_view text) {
  std::size_t begin = 0;
  std::size_t end = text.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(text[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
  return std::string(text.substr(begin, end - begin));
}

}  // namespace robotr1
