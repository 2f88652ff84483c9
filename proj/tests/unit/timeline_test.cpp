#include <gtest/gtest.h>

#include <random>

#include "avground/error.hpp"
#include "avground/timeline.hpp"
#include "oracles.hpp"

namespace avground {
namespace {

TEST(RenderTimestamp, KnownRenderings) {
  EXPECT_EQ(render_timestamp(Timestamp(0.0)), "second{0.0}");
  EXPECT_EQ(render_timestamp(Timestamp(2.0)), "second{2.0}");
  EXPECT_EQ(render_timestamp(Timestamp(126.0)), "second{126.0}");
}

TEST(RenderTimestamp, RoundsHalfUpToOneDecimal) {
  EXPECT_EQ(render_timestamp(Timestamp(3.14)), "second{3.1}");
  EXPECT_EQ(render_timestamp(Timestamp(0.25)), "second{0.3}");
  EXPECT_EQ(render_timestamp(Timestamp(0.15)), "second{0.2}");
  EXPECT_EQ(render_timestamp(Timestamp(9.95)), "second{10.0}");
  EXPECT_EQ(render_timestamp(Timestamp(99.96)), "second{100.0}");
  EXPECT_EQ(render_timestamp(Timestamp(1e-7)), "second{0.0}");
}

TEST(RenderTimestamp, MatchesIntegerRoundingOracle) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::int64_t> ms(0, 3'600'000);
  for (int i = 0; i < 20000; ++i) {
    const auto v = ms(rng);
    EXPECT_EQ(render_timestamp(Timestamp(static_cast<double>(v) / 1000.0)), oracle::render_ms(v)) << v;
  }
}

TEST(Timestamp, RejectsNegative) {
  EXPECT_THROW(Timestamp(-0.1), InvalidArgument);
  EXPECT_THROW(TimeInterval(5.0, 4.0), InvalidArgument);
}

TEST(ParseTimestamp, Grammar) {
  EXPECT_DOUBLE_EQ(parse_timestamp("second{2.0}").seconds(), 2.0);
  EXPECT_DOUBLE_EQ(parse_timestamp("second{7}").seconds(), 7.0);
  EXPECT_DOUBLE_EQ(parse_timestamp("second{12.345}").seconds(), 12.345);
  for (const char* bad : {"2.0 seconds", "second{}", "second{.5}", "second{5.}", "second{-1.0}",
                          "second{1e3}", "Second{1.0}", "second{1.0", "second{1.0}x", " second{1.0}"}) {
    EXPECT_THROW(parse_timestamp(bad), MalformedTimestamp) << bad;
  }
}

TEST(ParseInterval, Grammar) {
  auto p = parse_interval("second{3.0}-second{12.5}");
  EXPECT_FALSE(p.reversed());
  EXPECT_EQ(*p.interval(), TimeInterval(3.0, 12.5));

  auto padded = parse_interval("  second{3.0}-second{12.5}\n");
  EXPECT_EQ(*padded.interval(), TimeInterval(3.0, 12.5));

  auto rev = parse_interval("second{12.5}-second{3.0}");
  EXPECT_TRUE(rev.reversed());
  EXPECT_FALSE(rev.interval().has_value());

  for (const char* bad : {"from 3 to 12", "second{3.0} - second{12.5}", "second{3.0}--second{12.5}",
                          "second{3.0}-second{12.5}.", "second{3.0}", "second{3.0}-", ""}) {
    EXPECT_THROW(parse_interval(bad), MalformedInterval) << bad;
  }
}

TEST(ParseInterval, CanonicalRoundTrip) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> tenths(0, 6000);
  for (int i = 0; i < 5000; ++i) {
    int a = tenths(rng), b = tenths(rng);
    if (a > b) std::swap(a, b);
    const TimeInterval iv(a / 10.0, b / 10.0);
    const std::string s = render_interval(iv);
    const auto back = parse_interval(s);
    ASSERT_TRUE(back.interval().has_value());
    EXPECT_EQ(render_interval(*back.interval()), s);
    EXPECT_EQ(render_timestamp(parse_timestamp(render_timestamp(iv.start()))), render_timestamp(iv.start()));
  }
}

TEST(Iou, Examples) {
  EXPECT_DOUBLE_EQ(iou(TimeInterval(10, 20), TimeInterval(10, 20)), 1.0);
  EXPECT_DOUBLE_EQ(iou(TimeInterval(0, 5), TimeInterval(10, 20)), 0.0);
  EXPECT_DOUBLE_EQ(iou(TimeInterval(2, 8), TimeInterval(4, 10)), 0.5);
}

TEST(Iou, DegenerateIntervals) {
  EXPECT_DOUBLE_EQ(iou(TimeInterval(3, 3), TimeInterval(3, 3)), 1.0);
  EXPECT_DOUBLE_EQ(iou(TimeInterval(3, 3), TimeInterval(4, 4)), 0.0);
  EXPECT_DOUBLE_EQ(iou(TimeInterval(3, 3), TimeInterval(0, 10)), 0.0);
  EXPECT_DOUBLE_EQ(iou(TimeInterval(0, 10), TimeInterval(3, 3)), 0.0);
  EXPECT_DOUBLE_EQ(iou(TimeInterval(0, 5), TimeInterval(5, 10)), 0.0);  // touching
}

TEST(Iou, ReversedPredictionIsEmpty) {
  const auto rev = parse_interval("second{8.0}-second{2.0}");
  EXPECT_DOUBLE_EQ(iou(rev, TimeInterval(2, 8)), 0.0);
}

TEST(Iou, AgreesWithBinOracle) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> ms(0, 60'000);
  for (int i = 0; i < 300; ++i) {
    int a0 = ms(rng), a1 = ms(rng), b0 = ms(rng), b1 = ms(rng);
    if (a0 > a1) std::swap(a0, a1);
    if (b0 > b1) std::swap(b0, b1);
    if (a0 == a1 || b0 == b1) continue;
    const double got = iou(TimeInterval(a0 / 1000.0, a1 / 1000.0), TimeInterval(b0 / 1000.0, b1 / 1000.0));
    EXPECT_NEAR(got, oracle::iou_bins(a0 / 1000.0, a1 / 1000.0, b0 / 1000.0, b1 / 1000.0), 1e-3);
    EXPECT_EQ(oracle::iou_bins_ms(a0, a1, b0, b1), oracle::iou_bins(a0 / 1000.0, a1 / 1000.0, b0 / 1000.0, b1 / 1000.0));
  }
}

}  // namespace
}  // namespace avground
