#pragma once

#include <cmath>
#include <string>
#include <string_view>

namespace avground::detail {

inline bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

inline double round2(double v) { return std::round(v * 100.0) / 100.0; }

}  // namespace avground::detail
