#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "avground/caption_metrics.hpp"
#include "avground/qa_builder.hpp"
#include "avground/timeline.hpp"

namespace avground {

// Rollout settings for group-relative policy optimisation.
struct RewardConfig {
  std::size_t group_size = 4;
  double kl_beta = 0.04;
  double temperature = 1.0;
  std::size_t max_gen_tokens = 1024;
  Subtask subtask = Subtask::kV2T;

  // Throws InvalidConfig unless group_size >= 2, kl_beta >= 0 and
  // temperature > 0.
  void validate() const;
};

// A group of sampled completions with their rewards and advantages.
struct RewardBatch {
  std::vector<std::string> completions;
  std::vector<double> rewards;
  std::vector<double> advantages;
};

// Advantages whose group reward spread is below this are all set to zero.
inline constexpr double kAdvantageStdFloor = 1e-8;

// IoU of the parsed completion against gt; 0 for anything that does not
// parse or is reversed.
double reward_iou(std::string_view completion, const TimeInterval& gt);

// 1 iff the trimmed completion is exactly one `second{a}-second{b}`.
double reward_format(std::string_view completion);

// METEOR over canonical tokens of both strings.
double reward_meteor(std::string_view completion, std::string_view gt_caption,
                     const MetricConfig& config = kDefaultMetricConfig);

// (r_i - mean) / std with population std; zeros when std < kAdvantageStdFloor.
// Throws GroupSizeMismatch when rewards.size() != group_size or < 2.
std::vector<double> group_advantages(std::span<const double> rewards, std::size_t group_size);
std::vector<double> group_advantages(std::span<const double> rewards);

struct RewardWeights {
  double task = 1.0;
  double format = 1.0;
};

// Per-subtask weights; grounding subtasks default to (1, 1), caption
// subtasks to (1, 0).
using WeightTable = std::map<Subtask, RewardWeights>;
WeightTable default_reward_weights();

// grounding: task * reward_iou + format * reward_format.
// caption:   task * reward_meteor.
// Throws UnknownSubtask when the target's subtask has no weights.
double composite_reward(std::string_view completion, const QaPair& target,
                        const WeightTable& weights = default_reward_weights());

// composite_reward for every completion, then group_advantages with the
// configured group size. Throws GroupSizeMismatch.
RewardBatch score_group(std::span<const std::string> completions, const QaPair& target,
                        const RewardConfig& config = {},
                        const WeightTable& weights = default_reward_weights());

// --- desk-scale demonstration -------------------------------------------

struct DemoTrace {
  std::vector<double> mean_reward;  // per iteration, mean IoU of the group

  // Mean of the first / last `window` entries (clamped to the trace size).
  double initial_reward(std::size_t window = 50) const;
  double final_reward(std::size_t window = 50) const;
};

// Optimises a Gaussian interval policy on a synthetic 100 s timeline with a
// handful of cues, each hiding a fixed target interval. Every iteration picks
// a cue, samples group_size intervals, scores them with reward_iou, and takes
// an advantage-weighted score-function step; kl_beta pulls the parameters
// toward their initial values. Deterministic in seed. Throws InvalidConfig.
DemoTrace run_grpo_demo(const RewardConfig& config, std::uint64_t seed, std::size_t iterations);

}  // namespace avground
