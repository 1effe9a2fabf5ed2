#pragma once

// Number <-> text helpers shared by the CSV/GeoJSON/weights writers.
// Doubles are rendered with std::to_chars shortest round-trip form, so
// emitted files are byte-stable across runs and re-parse to the same bits.

#include <charconv>
#include <cstdlib>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>

namespace floodaudit {

inline std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string format_size(std::size_t v) { return std::to_string(v); }

// strict numeric parse of a whole field; nullopt when not a number
inline std::optional<double> parse_double(std::string_view s) {
  // trim ASCII whitespace
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  if (b == e) return std::nullopt;
  double value = 0.0;
  auto sv = s.substr(b, e - b);
  // from_chars does not accept a leading '+'
  if (!sv.empty() && sv.front() == '+') sv.remove_prefix(1);
  auto res = std::from_chars(sv.data(), sv.data() + sv.size(), value);
  if (res.ec != std::errc() || res.ptr != sv.data() + sv.size()) return std::nullopt;
  return value;
}

}  // namespace floodaudit
