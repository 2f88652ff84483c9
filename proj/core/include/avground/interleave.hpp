#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "avground/timeline.hpp"

namespace avground {

enum class BlockKind { kTime, kVideo, kAudio };

// One block of the time/video/audio layout. TIME blocks carry the rendered
// timestamp in `text` and have payload_len 0; VIDEO blocks sit on the frame
// instant; AUDIO blocks cover [t_i, t_{i+1}).
struct TokenBlock {
  BlockKind kind = BlockKind::kTime;
  std::size_t index = 0;  // 1-based frame position
  TimeInterval span;
  std::size_t payload_len = 0;
  std::string text;
};

struct TokenTotals {
  std::size_t time_blocks = 0;
  std::size_t video_tokens = 0;
  std::size_t audio_tokens = 0;
};

struct InterleavedSequence {
  std::vector<TokenBlock> blocks;
  double duration_s = 0.0;
  std::size_t frame_count = 0;
  TokenTotals totals;
};

// Frame instants t_i = i * duration / (frame_count - 1). Throws InvalidConfig
// for non-positive duration or frame_count < 2.
std::vector<Timestamp> sample_timeline(double duration_s, std::size_t frame_count);

// T_1 V_1 A_1 ... T_N V_N A_N. A_i carries round(audio_tokens_per_second *
// |t_{i+1} - t_i|) tokens; the last audio block has an empty span at t_N.
// Throws InvalidConfig when video_tokens_per_frame is 0.
InterleavedSequence build_sequence(double duration_s, std::size_t frame_count,
                                   std::size_t video_tokens_per_frame,
                                   std::size_t audio_tokens_per_second);

// Line form used by the CLI: `T second{t}`, `V <n>`, `A <n> [a,b)`.
std::string format_layout(const InterleavedSequence& seq);

}  // namespace avground
