#include "avground/rewards.hpp"

#include <cmath>

#include "avground/error.hpp"
#include "text_util.hpp"

namespace avground {

void RewardConfig::validate() const {
  if (group_size < 2) throw InvalidConfig("group_size must be at least 2");
  if (!(kl_beta >= 0.0)) throw InvalidConfig("kl_beta must be non-negative");
  if (!(temperature > 0.0)) throw InvalidConfig("temperature must be positive");
}

double reward_iou(std::string_view completion, const TimeInterval& gt) {
  auto parsed = try_parse_interval(completion);
  return parsed ? iou(*parsed, gt) : 0.0;
}

double reward_format(std::string_view completion) {
  // try_parse_interval already trims and requires the whole string to match.
  return try_parse_interval(completion) ? 1.0 : 0.0;
}

double reward_meteor(std::string_view completion, std::string_view gt_caption,
                     const MetricConfig& config) {
  return meteor(tokenize(completion), tokenize(gt_caption), config);
}

std::vector<double> group_advantages(std::span<const double> rewards, std::size_t group_size) {
  if (rewards.size() != group_size) {
    throw GroupSizeMismatch("expected " + std::to_string(group_size) + " rewards, got " +
                            std::to_string(rewards.size()));
  }
  if (group_size < 2) throw GroupSizeMismatch("group size must be at least 2");

  const auto n = static_cast<double>(rewards.size());
  double mean = 0.0;
  for (double r : rewards) mean += r;
  mean /= n;
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  const double std_dev = std::sqrt(var / n);

  std::vector<double> adv(rewards.size(), 0.0);
  if (!(std_dev >= kAdvantageStdFloor)) return adv;
  for (std::size_t i = 0; i < rewards.size(); ++i) adv[i] = (rewards[i] - mean) / std_dev;
  return adv;
}

std::vector<double> group_advantages(std::span<const double> rewards) {
  return group_advantages(rewards, rewards.size());
}

WeightTable default_reward_weights() {
  WeightTable w;
  for (Subtask s : kAllSubtasks) {
    w[s] = is_grounding(s) ? RewardWeights{1.0, 1.0} : RewardWeights{1.0, 0.0};
  }
  return w;
}

double composite_reward(std::string_view completion, const QaPair& target,
                        const WeightTable& weights) {
  auto it = weights.find(target.subtask);
  if (it == weights.end()) {
    throw UnknownSubtask("no reward weights for subtask '" +
                         std::string(subtask_name(target.subtask)) + "'");
  }
  const auto& w = it->second;
  if (is_grounding(target.subtask)) {
    return w.task * reward_iou(completion, target.interval) + w.format * reward_format(completion);
  }
  return w.task * reward_meteor(completion, target.answer);
}

RewardBatch score_group(std::span<const std::string> completions, const QaPair& target,
                        const RewardConfig& config, const WeightTable& weights) {
  RewardBatch batch;
  batch.completions.assign(completions.begin(), completions.end());
  batch.rewards.reserve(completions.size());
  for (const auto& c : completions) batch.rewards.push_back(composite_reward(c, target, weights));
  batch.advantages = group_advantages(batch.rewards, config.group_size);
  return batch;
}

double DemoTrace::initial_reward(std::size_t window) const {
  const auto n = std::min(window, mean_reward.size());
  if (n == 0) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += mean_reward[i];
  return s / static_cast<double>(n);
}

double DemoTrace::final_reward(std::size_t window) const {
  const auto n = std::min(window, mean_reward.size());
  if (n == 0) return 0.0;
  double s = 0.0;
  for (std::size_t i = mean_reward.size() - n; i < mean_reward.size(); ++i) s += mean_reward[i];
  return s / static_cast<double>(n);
}

}  // namespace avground
