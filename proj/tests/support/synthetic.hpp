#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "avground/annotations.hpp"

namespace testing_support {

inline std::string random_caption(std::mt19937_64& rng, std::size_t min_words, std::size_t max_words) {
  static constexpr std::array<const char*, 40> kWords = {
      "a",       "man",      "woman",   "dog",      "runs",     "jumps",   "across",  "the",
      "field",   "kitchen",  "speaks",  "music",    "plays",    "loudly",  "softly",  "camera",
      "pans",    "over",     "city",    "street",   "car",      "engine",  "roars",   "children",
      "laughing", "birds",   "singing", "wind",     "blowing",  "through", "trees",   "she",
      "cooking", "pasta",    "guitar",  "strums",   "crowd",    "cheers",  "rain",    "falls"};
  std::uniform_int_distribution<std::size_t> len(min_words, max_words);
  std::uniform_int_distribution<std::size_t> pick(0, kWords.size() - 1);
  std::string out;
  const auto n = len(rng);
  for (std::size_t i = 0; i < n; ++i) {
    if (i) out += ' ';
    out += kWords[pick(rng)];
  }
  return out;
}

// Contiguous, one-decimal segment boundaries.
inline std::vector<avground::VideoAnnotation> synthetic_corpus(std::size_t videos, std::uint64_t seed,
                                                               double min_dur = 60.0, double max_dur = 600.0,
                                                               std::size_t min_seg = 5, std::size_t max_seg = 30) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> dur_tenths(static_cast<int>(min_dur * 10), static_cast<int>(max_dur * 10));
  std::uniform_int_distribution<std::size_t> seg_count(min_seg, max_seg);
  std::vector<avground::VideoAnnotation> out;
  out.reserve(videos);
  for (std::size_t v = 0; v < videos; ++v) {
    avground::VideoAnnotation a;
    a.video_id = "vid" + std::to_string(v);
    const int total = dur_tenths(rng);
    a.duration_s = total / 10.0;
    if (v % 3 == 0) a.domain = "domain" + std::to_string(v % 7);
    const auto n = std::min<std::size_t>(seg_count(rng), static_cast<std::size_t>(total));
    std::set<int> cuts;
    std::uniform_int_distribution<int> cut(1, total - 1);
    while (cuts.size() + 1 < n) cuts.insert(cut(rng));
    std::vector<int> b = {0};
    b.insert(b.end(), cuts.begin(), cuts.end());
    b.push_back(total);
    for (std::size_t i = 0; i + 1 < b.size(); ++i) {
      a.segments.push_back({avground::TimeInterval(b[i] / 10.0, b[i + 1] / 10.0),
                            random_caption(rng, 4, 16), random_caption(rng, 4, 16)});
    }
    out.push_back(std::move(a));
  }
  return out;
}

}  // namespace testing_support
