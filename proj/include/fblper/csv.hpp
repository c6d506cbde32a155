#pragma once

#include <charconv>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace fblper::csv {

/// Shortest representation that round-trips; identical bits give identical text.
inline std::string number(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

inline std::string number(std::int64_t x) { return std::to_string(x); }
inline std::string number(std::uint64_t x) { return std::to_string(x); }
inline std::string number(int x) { return std::to_string(x); }

/// Semicolon-joined list, used for the per-packet columns.
inline std::string join(std::span<const double> xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ';';
    out += number(xs[i]);
  }
  return out;
}

inline std::string row(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += fields[i];
  }
  out += '\n';
  return out;
}

}  // namespace fblper::csv
