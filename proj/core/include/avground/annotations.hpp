#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "avground/timeline.hpp"

namespace avground {

// One (interval, video caption, audio caption) triplet.
struct SegmentAnnotation {
  TimeInterval interval;
  std::string video_caption;
  std::string audio_caption;

  friend bool operator==(const SegmentAnnotation&, const SegmentAnnotation&) = default;
};

struct VideoAnnotation {
  std::string video_id;
  double duration_s = 0.0;
  std::optional<std::string> domain;
  std::vector<SegmentAnnotation> segments;

  // Segment boundaries t_0 ... t_n.
  std::vector<Timestamp> boundaries() const;

  friend bool operator==(const VideoAnnotation&, const VideoAnnotation&) = default;
};

// Overlaps and gaps below this many seconds are tolerated (warned), larger
// overlaps are rejected.
inline constexpr double kOverlapToleranceS = 0.05;

struct LoadWarning {
  std::size_t line = 0;
  std::string message;
};

struct AnnotationSet {
  std::vector<VideoAnnotation> annotations;
  std::vector<LoadWarning> warnings;
};

// Validates one annotation, appending soft issues (gaps, tolerated overlaps)
// to `warnings`. Throws ValidationError on hard violations.
void validate_annotation(const VideoAnnotation& anno, std::size_t line,
                         std::vector<LoadWarning>* warnings = nullptr);

// Parses annotations.jsonl content. Blank lines are skipped. Throws
// SchemaError (missing field, wrong type, bad JSON) or ValidationError, with
// the offending line number.
AnnotationSet parse_annotations(std::istream& in);
AnnotationSet load_annotations(const std::filesystem::path& path);

// One JSON object, fixed key order, no trailing newline.
std::string serialize_annotation(const VideoAnnotation& anno);
void write_annotations(std::ostream& out, std::span<const VideoAnnotation> annos);

struct CorpusFilter {
  double min_duration_s = 60.0;
  double max_duration_s = 600.0;
  std::size_t min_segments = 5;
  std::size_t max_segments = 30;
};

// Keeps annotations whose duration and segment count fall inside the
// inclusive bounds, preserving order.
std::vector<VideoAnnotation> filter_corpus(std::span<const VideoAnnotation> annos,
                                           const CorpusFilter& filter = {});

// Greedy adjacent merging. While some adjacent pair has similarity >=
// threshold, or there are more than max_segments segments, the pair with the
// highest similarity is merged (ties go to the earlier pair). Only adjacent
// similarities are observed, so the similarity between two merged neighbours
// is the mean over observed member pairs straddling their seam, which is the
// single original seam score.
//
// `boundaries` holds n+1 strictly increasing timestamps for n segments and
// `adjacent_similarity` holds n-1 scores in [0, 1]. Throws DimensionMismatch
// or InvalidArgument.
std::vector<Timestamp> merge_segments(std::span<const Timestamp> boundaries,
                                      std::span<const double> adjacent_similarity,
                                      double threshold, std::size_t max_segments);

// items x categories matrix of vote counts.
class AgreementTable {
 public:
  // Throws InvalidArgument unless there are >= 2 items, >= 1 category, and
  // every row sums to the same annotator count >= 2.
  explicit AgreementTable(std::vector<std::vector<int>> counts);

  std::size_t items() const { return counts_.size(); }
  std::size_t categories() const { return counts_.front().size(); }
  int raters() const { return raters_; }
  const std::vector<std::vector<int>>& counts() const { return counts_; }

 private:
  std::vector<std::vector<int>> counts_;
  int raters_ = 0;
};

// Fleiss' kappa. Throws DegenerateAgreement when the expected agreement is 1
// (a single category used for every vote).
double fleiss_kappa(const AgreementTable& table);

// Caption-provider prompts used to produce segment captions.
namespace prompts {
inline constexpr std::string_view kVideoCaption =
    "The user will input a video. Please provide a brief description of the main visual "
    "content of the video. Avoid specific timestamps and keep the content concise. Avoid "
    "using indicative phrases like 'in the video' and directly output the visual information.";
inline constexpr std::string_view kAudioCaption =
    "The user will input a audio. Briefly describe the audio information, including the "
    "original text of the speech, audio events, etc. Avoid using indicative phrases like 'in "
    "the audio' and directly output the audio information. Do not interpret the meaning of "
    "the speech expressed in the audio; just record what you hear concisely. For audio "
    "events, only output those that you are very certain about, and disregard any uncertain "
    "sounds. Record speech and audio events in order, but avoid specific timestamps. ##For "
    "example: A train whistle blows followed by a character speaking in a crisp voice, "
    "'Hello, my name is John. I would like to help you learn the numbers.' This is all "
    "accompanied by the sound of a train moving on its tracks.";
}  // namespace prompts

}  // namespace avground
