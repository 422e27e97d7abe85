#pragma once

#include <charconv>
#include <string>
#include <string_view>
#include <vector>

#include "altbayes/numerics.hpp"

namespace altbayes::csv {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

// Plain comma splitting; the formats read here never quote fields.
inline std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.emplace_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos
                                                                              : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline std::string where(std::size_t line_no) {
  return "line " + std::to_string(line_no) + ": ";
}

inline double parse_double(std::string_view s, std::size_t line_no, std::string_view what) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, v);
  if (s.empty() || res.ec != std::errc() || res.ptr != end) {
    throw UsageError(where(line_no) + std::string(what) + " '" + std::string(s) +
                     "' is not a number");
  }
  return v;
}

// Shortest text that reads back to the same double.
inline std::string exact(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace altbayes::csv
