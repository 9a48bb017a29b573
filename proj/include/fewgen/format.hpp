#pragma once

#include <charconv>
#include <string>

namespace fewgen {

// Locale-independent decimal formatting for CSV output ('.' separator always).
inline std::string fmt_float(double v, int precision = 6) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, precision);
  if (ec != std::errc()) return "nan";
  return std::string(buf, ptr);
}

// Shortest round-trip representation.
inline std::string fmt_float_full(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) return "nan";
  return std::string(buf, ptr);
}

}  // namespace fewgen
