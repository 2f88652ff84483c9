#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "avground/annotations.hpp"
#include "avground/timeline.hpp"

namespace avground {

// The six query directions over (video, audio, time).
enum class Subtask { kV2T, kT2V, kA2T, kT2A, kV2A, kA2V };

inline constexpr std::array<Subtask, 6> kAllSubtasks = {
    Subtask::kV2T, Subtask::kT2V, Subtask::kA2T, Subtask::kT2A, Subtask::kV2A, Subtask::kA2V};

// "v2t", "t2v", ...
std::string_view subtask_name(Subtask s);
// Case-insensitive. Throws UnknownSubtask.
Subtask subtask_from_name(std::string_view name);
// V2T and A2T answer with an interval; the rest answer with a caption.
constexpr bool is_grounding(Subtask s) { return s == Subtask::kV2T || s == Subtask::kA2T; }

struct QaPair {
  std::string qa_id;
  std::string video_id;
  Subtask subtask = Subtask::kV2T;
  std::string question;
  std::string answer;
  TimeInterval interval;
  // Optional media references forwarded to a model endpoint.
  std::optional<std::string> video_ref;
  std::optional<std::string> audio_ref;

  friend bool operator==(const QaPair&, const QaPair&) = default;
};

// Question templates, one per subtask. `{caption}` expands to the query
// caption and `{interval}` to the rendered source interval.
struct TemplateSet {
  std::string id;
  std::array<std::string, 6> questions;  // indexed like kAllSubtasks
};

inline constexpr std::string_view kDefaultTemplateSet = "default-v1";

// Registered template sets. "default-v1" is always present.
class TemplateRegistry {
 public:
  static TemplateRegistry& instance();
  // Replaces any set with the same id.
  void add(TemplateSet set);
  // Throws InvalidArgument for unknown ids.
  const TemplateSet& get(std::string_view id) const;

 private:
  TemplateRegistry();
  std::vector<TemplateSet> sets_;
};

// Six pairs for one segment, one per direction, in kAllSubtasks order.
// Throws IndexOutOfRange.
std::vector<QaPair> build_qa(const VideoAnnotation& anno, std::size_t segment_index,
                             std::string_view template_set = kDefaultTemplateSet);

// Uniform, deterministic in (video_id, seed). Throws EmptyAnnotation.
std::size_t select_test_segment(const VideoAnnotation& anno, std::uint64_t seed);

// One held-out segment per video, six pairs each.
std::vector<QaPair> build_test_set(std::span<const VideoAnnotation> annos, std::uint64_t seed,
                                   std::string_view template_set = kDefaultTemplateSet);

// `second{s}-second{e} | V: <video caption> | A: <audio caption>` per
// segment, newline separated, timeline order.
std::string build_dense_caption_target(const VideoAnnotation& anno);
// Inverse of build_dense_caption_target. Throws SchemaError with the line.
std::vector<SegmentAnnotation> parse_dense_caption_target(std::string_view text);

// qa.jsonl
std::string serialize_qa(const QaPair& qa);
void write_qa(std::ostream& out, std::span<const QaPair> pairs);
// Throws SchemaError / ValidationError with line numbers.
std::vector<QaPair> parse_qa(std::istream& in);
std::vector<QaPair> load_qa(const std::filesystem::path& path);

}  // namespace avground
