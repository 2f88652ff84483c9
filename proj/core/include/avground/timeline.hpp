#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace avground {

// A point on a media timeline in absolute seconds. Always non-negative.
class Timestamp {
 public:
  constexpr Timestamp() = default;
  // Throws InvalidArgument for negative or non-finite values.
  explicit Timestamp(double seconds);

  constexpr double seconds() const { return seconds_; }

  friend constexpr auto operator<=>(const Timestamp&, const Timestamp&) = default;

 private:
  double seconds_ = 0.0;
};

// Closed interval [start, end] of absolute seconds with start <= end.
class TimeInterval {
 public:
  constexpr TimeInterval() = default;
  // Throws InvalidArgument when end < start.
  TimeInterval(Timestamp start, Timestamp end);
  TimeInterval(double start_s, double end_s);

  constexpr Timestamp start() const { return start_; }
  constexpr Timestamp end() const { return end_; }
  constexpr double duration() const { return end_.seconds() - start_.seconds(); }

  friend constexpr bool operator==(const TimeInterval&, const TimeInterval&) = default;

 private:
  Timestamp start_;
  Timestamp end_;
};

// Result of parsing a model-emitted `second{a}-second{b}` string. The two
// endpoints are kept in the order written; a reversed pair is syntactically
// valid but denotes no interval.
struct ParsedInterval {
  Timestamp first;
  Timestamp second;

  bool reversed() const { return second < first; }
  // Empty for reversed pairs.
  std::optional<TimeInterval> interval() const;
};

// `second{X.Y}`, rounded half-up to one decimal on the shortest decimal
// representation of the value.
std::string render_timestamp(Timestamp t);
// `second{a}-second{b}`
std::string render_interval(const TimeInterval& interval);

// Accepts `second{<digits>}` and `second{<digits>.<digits>}` exactly.
// Throws MalformedTimestamp.
Timestamp parse_timestamp(std::string_view text);

// Two timestamps joined by a single hyphen, optionally surrounded by
// whitespace. Throws MalformedInterval.
ParsedInterval parse_interval(std::string_view text);
std::optional<ParsedInterval> try_parse_interval(std::string_view text);

// |a ∩ b| / |a ∪ b|. Zero-length intervals score 0 unless both are the same
// point, which scores 1.
double iou(const TimeInterval& a, const TimeInterval& b);
// Reversed predictions are empty and score 0.
double iou(const ParsedInterval& pred, const TimeInterval& gt);

}  // namespace avground
