#include "avground/interleave.hpp"

#include <cmath>
#include <sstream>

#include "avground/error.hpp"

namespace avground {

std::vector<Timestamp> sample_timeline(double duration_s, std::size_t frame_count) {
  if (!(duration_s > 0.0) || !std::isfinite(duration_s)) {
    throw InvalidConfig("duration must be positive");
  }
  if (frame_count < 2) throw InvalidConfig("frame_count must be at least 2");

  std::vector<Timestamp> stamps;
  stamps.reserve(frame_count);
  const double denom = static_cast<double>(frame_count - 1);
  for (std::size_t i = 0; i + 1 < frame_count; ++i) {
    stamps.emplace_back(static_cast<double>(i) * duration_s / denom);
  }
  stamps.emplace_back(duration_s);  // exact endpoint
  return stamps;
}

InterleavedSequence build_sequence(double duration_s, std::size_t frame_count,
                                   std::size_t video_tokens_per_frame,
                                   std::size_t audio_tokens_per_second) {
  if (video_tokens_per_frame == 0) throw InvalidConfig("video_tokens_per_frame must be positive");
  const auto stamps = sample_timeline(duration_s, frame_count);

  InterleavedSequence seq;
  seq.duration_s = duration_s;
  seq.frame_count = frame_count;
  seq.blocks.reserve(3 * frame_count);

  for (std::size_t i = 0; i < stamps.size(); ++i) {
    const Timestamp t = stamps[i];
    const Timestamp next = i + 1 < stamps.size() ? stamps[i + 1] : t;
    const TimeInterval point(t, t);
    const TimeInterval slice(t, next);
    const auto audio = static_cast<std::size_t>(
        std::llround(static_cast<double>(audio_tokens_per_second) * slice.duration()));

    seq.blocks.push_back({BlockKind::kTime, i + 1, point, 0, render_timestamp(t)});
    seq.blocks.push_back({BlockKind::kVideo, i + 1, point, video_tokens_per_frame, {}});
    seq.blocks.push_back({BlockKind::kAudio, i + 1, slice, audio, {}});

    seq.totals.time_blocks += 1;
    seq.totals.video_tokens += video_tokens_per_frame;
    seq.totals.audio_tokens += audio;
  }
  return seq;
}

std::string format_layout(const InterleavedSequence& seq) {
  auto decimal = [](Timestamp t) {
    // Reuse the timestamp renderer's rounding and strip the wrapper.
    const std::string r = render_timestamp(t);
    return r.substr(7, r.size() - 8);
  };
  std::ostringstream out;
  for (const auto& b : seq.blocks) {
    switch (b.kind) {
      case BlockKind::kTime:
        out << "T " << b.text << '\n';
        break;
      case BlockKind::kVideo:
        out << "V " << b.payload_len << '\n';
        break;
      case BlockKind::kAudio:
        out << "A " << b.payload_len << " [" << decimal(b.span.start()) << ','
            << decimal(b.span.end()) << ")\n";
        break;
    }
  }
  return out.str();
}

}  // namespace avground
