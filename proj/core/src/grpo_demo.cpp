#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include "avground/error.hpp"
#include "avground/rewards.hpp"

namespace avground {

namespace {

constexpr double kTimelineS = 100.0;
constexpr std::size_t kCues = 4;

// Step sizes for the Fisher-preconditioned score-function update.
constexpr double kMeanStep = 0.15;
constexpr double kLogStdStep = 0.05;

// Gaussian policy over (start, log length) in timeline-normalised units.
struct CuePolicy {
  double start_mean = 0.45;
  double loglen_mean = std::log(0.1);
  double start_logstd = std::log(0.25);
  double loglen_logstd = std::log(0.5);

  std::array<double, 4> params() const { return {start_mean, loglen_mean, start_logstd, loglen_logstd}; }
  void set(const std::array<double, 4>& p) {
    start_mean = p[0];
    loglen_mean = p[1];
    start_logstd = p[2];
    loglen_logstd = p[3];
  }
};

struct Rollout {
  double z_start = 0.0;
  double z_len = 0.0;
  std::string completion;
};

}  // namespace

DemoTrace run_grpo_demo(const RewardConfig& config, std::uint64_t seed, std::size_t iterations) {
  config.validate();
  if (iterations == 0) throw InvalidConfig("iterations must be at least 1");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  std::array<TimeInterval, kCues> targets;
  for (auto& t : targets) {
    const double len = 8.0 + 12.0 * unit(rng);
    const double start = (kTimelineS - len) * unit(rng);
    // Targets on the 0.1 s grid so a perfect rollout can score exactly 1.
    const double s = std::round(start * 10.0) / 10.0;
    const double e = std::round((start + len) * 10.0) / 10.0;
    t = TimeInterval(s, e);
  }

  std::array<CuePolicy, kCues> policies{};
  const auto initial = policies[0].params();

  DemoTrace trace;
  trace.mean_reward.reserve(iterations);
  std::vector<Rollout> group(config.group_size);
  std::vector<double> rewards(config.group_size);

  for (std::size_t it = 0; it < iterations; ++it) {
    const auto cue = static_cast<std::size_t>(unit(rng) * kCues) % kCues;
    auto& pol = policies[cue];
    const double start_sd = config.temperature * std::exp(pol.start_logstd);
    const double len_sd = config.temperature * std::exp(pol.loglen_logstd);

    double mean_reward = 0.0;
    for (std::size_t g = 0; g < group.size(); ++g) {
      auto& r = group[g];
      r.z_start = normal(rng);
      r.z_len = normal(rng);
      const double start_u = std::clamp(pol.start_mean + start_sd * r.z_start, 0.0, 1.0);
      const double len_u = std::exp(pol.loglen_mean + len_sd * r.z_len);
      const double start = start_u * kTimelineS;
      const double end = std::min(start + len_u * kTimelineS, kTimelineS);
      r.completion = render_interval(TimeInterval(start, end));
      rewards[g] = reward_iou(r.completion, targets[cue]);
      mean_reward += rewards[g];
    }
    trace.mean_reward.push_back(mean_reward / static_cast<double>(group.size()));

    const auto adv = group_advantages(rewards, config.group_size);
    std::array<double, 4> grad{};
    for (std::size_t g = 0; g < group.size(); ++g) {
      const auto& r = group[g];
      grad[0] += adv[g] * r.z_start * start_sd;
      grad[1] += adv[g] * r.z_len * len_sd;
      grad[2] += adv[g] * (r.z_start * r.z_start - 1.0) * 0.5;
      grad[3] += adv[g] * (r.z_len * r.z_len - 1.0) * 0.5;
    }
    // Natural gradient of KL(pi || pi_ref) for a Gaussian against the initial
    // policy, preconditioned like the policy step.
    auto p = pol.params();
    std::array<double, 4> kl_grad{};
    for (std::size_t d = 0; d < 2; ++d) {
      const double var = std::exp(2.0 * p[2 + d]);
      const double ref_var = std::exp(2.0 * initial[2 + d]);
      kl_grad[d] = var * (p[d] - initial[d]) / ref_var;
      kl_grad[2 + d] = 0.5 * (var / ref_var - 1.0);
    }
    const std::array<double, 4> steps = {kMeanStep, kMeanStep, kLogStdStep, kLogStdStep};
    for (std::size_t k = 0; k < p.size(); ++k) {
      p[k] += steps[k] * (grad[k] / static_cast<double>(group.size()) - config.kl_beta * kl_grad[k]);
    }
    pol.set(p);
  }
  return trace;
}

}  // namespace avground
