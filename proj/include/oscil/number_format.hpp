#pragma once

#include <charconv>
#include <string>

namespace oscil {

/// 17-significant-digit rendering of a double, locale-independent ('.' decimal
/// point regardless of the environment); parses back to the identical bits.
inline std::string format_numeric(double v) {
  char buf[40];
  const auto r =
      std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, r.ptr);
}

}  // namespace oscil
