#pragma once

#include <charconv>
#include <cstdint>
#include <string>
#include <system_error>

namespace eprsim {

// 17 significant digits: enough for binary64 values to round-trip exactly
// through decimal text. Locale-independent by construction.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

inline std::string format_int(long long v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string format_uint(std::uint64_t v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

} // namespace eprsim
