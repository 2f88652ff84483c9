#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "avground/qa_builder.hpp"
#include "avground/rewards.hpp"

namespace avground {

struct PredictionRecord {
  std::string qa_id;
  std::string prediction;
  std::optional<std::string> error;   // set when collection failed
  std::optional<std::string> decode;  // endpoint-reported decode settings (JSON text)

  friend bool operator==(const PredictionRecord&, const PredictionRecord&) = default;
};

std::string serialize_prediction(const PredictionRecord& rec);
// {"qa_id", "prediction"} per line. Throws SchemaError; duplicate qa_ids are
// a SchemaError too.
std::vector<PredictionRecord> parse_predictions(std::istream& in);
std::vector<PredictionRecord> load_predictions(const std::filesystem::path& path);

struct MetricValue {
  double value = 0.0;
  std::size_t samples = 0;

  friend bool operator==(const MetricValue&, const MetricValue&) = default;
};

// Metric keys: "R@0.5", "R@0.7", "mIoU" for grounding subtasks and "BLEU-4",
// "ROUGE-L", "METEOR", "CIDEr" for caption subtasks. Values are rounded to
// two decimals; recall and mIoU are percentages.
struct SubtaskReport {
  Subtask subtask = Subtask::kV2T;
  std::size_t samples = 0;
  std::size_t missing = 0;         // no prediction record
  std::size_t parse_failures = 0;  // grounding predictions that did not parse
  std::map<std::string, MetricValue> metrics;

  friend bool operator==(const SubtaskReport&, const SubtaskReport&) = default;
};

struct EvalReport {
  std::string label;
  std::vector<SubtaskReport> subtasks;  // kAllSubtasks order, empty ones omitted
  std::size_t total_samples = 0;
  std::size_t missing_predictions = 0;
  std::map<std::string, std::string> config;
  std::vector<std::string> warnings;

  const SubtaskReport* find(Subtask s) const;

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

// Maps a raw model output onto the canonical answer grammar before scoring,
// e.g. for baselines that print times in their own format. None ship with
// the library.
using AnswerNormalizer = std::function<std::string(std::string_view prediction, Subtask subtask)>;

struct EvalOptions {
  std::string label = "model";
  AnswerNormalizer normalizer;  // empty: predictions are scored as given
  std::vector<double> iou_thresholds = {0.5, 0.7};
  MetricConfig metrics = kDefaultMetricConfig;
  std::size_t threads = 0;  // 0 = hardware concurrency
};

// Routes each QA by subtask to the grounding or caption metrics. A QA without
// a prediction is scored as a miss and counted. CIDEr document frequencies
// come from the answers of the same subtask. Throws UnresolvedQaId when a
// prediction names an unknown qa_id.
EvalReport evaluate(std::span<const QaPair> qa, std::span<const PredictionRecord> predictions,
                    const EvalOptions& options = {});
EvalReport evaluate(const std::filesystem::path& qa_path,
                    const std::filesystem::path& predictions_path, const EvalOptions& options = {});

enum class ReportFormat { kJson, kMarkdown };
// "json" | "markdown" (or "md"). Throws InvalidArgument.
ReportFormat report_format_from_name(std::string_view name);

// Sorted keys, two-decimal numbers; report_from_json(report_to_json(r)) == r.
std::string report_to_json(const EvalReport& report);
EvalReport report_from_json(std::string_view text);
// Table with one row per report label.
std::string report_to_markdown(std::span<const EvalReport> reports);
std::string emit_report(const EvalReport& report, ReportFormat format);

// --- rewards over files --------------------------------------------------

struct CompletionRecord {
  std::string qa_id;
  std::string completion;
};

std::vector<CompletionRecord> parse_completions(std::istream& in);

struct GroupScore {
  std::string qa_id;
  Subtask subtask = Subtask::kV2T;
  std::vector<double> rewards;
  std::vector<double> advantages;
};

// Groups completions by qa_id (first-appearance order) and scores each group
// with score_group. Throws UnresolvedQaId or GroupSizeMismatch.
std::vector<GroupScore> score_completions(std::span<const QaPair> qa,
                                          std::span<const CompletionRecord> completions,
                                          const RewardConfig& config = {},
                                          const WeightTable& weights = default_reward_weights());
std::string serialize_group_score(const GroupScore& g);

// --- prediction collection -----------------------------------------------

struct CollectOptions {
  std::string endpoint;  // http://host[:port]/path
  std::size_t concurrency = 4;
  std::chrono::duration<double> timeout{60.0};
  std::size_t retries = 2;
};

struct CollectStats {
  std::size_t total = 0;
  std::size_t skipped = 0;  // already collected in a previous run
  std::size_t succeeded = 0;
  std::size_t failed = 0;
};

// Posts {"question", "video_ref"?, "audio_ref"?} for each QA and appends
// {"qa_id", "prediction"} records to out_path. Successful records already in
// out_path are kept and skipped; failed ones are retried. Throws
// EndpointUnreachable before touching out_path when the endpoint cannot be
// reached.
CollectStats collect_predictions(std::span<const QaPair> qa, const std::filesystem::path& out_path,
                                 const CollectOptions& options);

// CHRONUS_ENDPOINT, if set.
std::optional<std::string> default_endpoint();

}  // namespace avground
