#include "avground/timeline.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <string>

#include "avground/error.hpp"
#include "text_util.hpp"

namespace avground {

Timestamp::Timestamp(double seconds) : seconds_(seconds) {
  if (!std::isfinite(seconds) || seconds < 0.0) {
    throw InvalidArgument("timestamp must be a finite non-negative number of seconds");
  }
}

TimeInterval::TimeInterval(Timestamp start, Timestamp end) : start_(start), end_(end) {
  if (end < start) {
    throw InvalidArgument("interval end precedes start");
  }
}

TimeInterval::TimeInterval(double start_s, double end_s)
    : TimeInterval(Timestamp(start_s), Timestamp(end_s)) {}

std::optional<TimeInterval> ParsedInterval::interval() const {
  if (reversed()) return std::nullopt;
  return TimeInterval(first, second);
}

namespace {

// Rounds the shortest round-trip decimal form of `value` half-up to one
// fractional digit. Working on the decimal string keeps 0.25 -> 0.3 and
// 3.14 -> 3.1 independent of binary representation error.
std::string round_one_decimal(double value) {
  std::array<char, 400> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value,
                                 std::chars_format::fixed);
  (void)ec;
  std::string text(buf.data(), ptr);

  auto dot = text.find('.');
  std::string int_part = dot == std::string::npos ? text : text.substr(0, dot);
  std::string frac = dot == std::string::npos ? std::string() : text.substr(dot + 1);

  int tenths = frac.empty() ? 0 : frac[0] - '0';
  bool round_up = frac.size() > 1 && frac[1] >= '5';
  if (round_up) {
    ++tenths;
    if (tenths == 10) {
      tenths = 0;
      // Propagate the carry through the integer digits.
      int i = static_cast<int>(int_part.size()) - 1;
      for (; i >= 0; --i) {
        if (int_part[i] == '9') {
          int_part[i] = '0';
        } else {
          ++int_part[i];
          break;
        }
      }
      if (i < 0) int_part.insert(int_part.begin(), '1');
    }
  }
  return int_part + "." + static_cast<char>('0' + tenths);
}

constexpr std::string_view kPrefix = "second{";

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

std::optional<Timestamp> try_parse_timestamp(std::string_view text) {
  if (text.size() < kPrefix.size() + 2 || text.substr(0, kPrefix.size()) != kPrefix ||
      text.back() != '}') {
    return std::nullopt;
  }
  std::string_view number = text.substr(kPrefix.size(), text.size() - kPrefix.size() - 1);
  auto dot = number.find('.');
  if (dot == std::string_view::npos) {
    if (!all_digits(number)) return std::nullopt;
  } else if (!all_digits(number.substr(0, dot)) || !all_digits(number.substr(dot + 1))) {
    return std::nullopt;
  }
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(number.data(), number.data() + number.size(), value,
                                   std::chars_format::fixed);
  if (ec != std::errc() || ptr != number.data() + number.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return Timestamp(value);
}

}  // namespace

std::string render_timestamp(Timestamp t) {
  return std::string(kPrefix) + round_one_decimal(t.seconds()) + "}";
}

std::string render_interval(const TimeInterval& interval) {
  return render_timestamp(interval.start()) + "-" + render_timestamp(interval.end());
}

Timestamp parse_timestamp(std::string_view text) {
  if (auto ts = try_parse_timestamp(text)) return *ts;
  throw MalformedTimestamp("malformed timestamp: '" + std::string(text) + "'");
}

std::optional<ParsedInterval> try_parse_interval(std::string_view text) {
  text = detail::trim(text);
  auto close = text.find('}');
  if (close == std::string_view::npos || close + 1 >= text.size() || text[close + 1] != '-') {
    return std::nullopt;
  }
  auto first = try_parse_timestamp(text.substr(0, close + 1));
  auto second = try_parse_timestamp(text.substr(close + 2));
  if (!first || !second) return std::nullopt;
  return ParsedInterval{*first, *second};
}

ParsedInterval parse_interval(std::string_view text) {
  if (auto parsed = try_parse_interval(text)) return *parsed;
  throw MalformedInterval("malformed interval: '" + std::string(text) + "'");
}

double iou(const TimeInterval& a, const TimeInterval& b) {
  const double len_a = a.duration();
  const double len_b = b.duration();
  if (len_a == 0.0 && len_b == 0.0) {
    return a == b ? 1.0 : 0.0;
  }
  const double lo = std::max(a.start().seconds(), b.start().seconds());
  const double hi = std::min(a.end().seconds(), b.end().seconds());
  const double inter = std::max(0.0, hi - lo);
  const double uni = len_a + len_b - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

double iou(const ParsedInterval& pred, const TimeInterval& gt) {
  auto interval = pred.interval();
  return interval ? iou(*interval, gt) : 0.0;
}

}  // namespace avground
