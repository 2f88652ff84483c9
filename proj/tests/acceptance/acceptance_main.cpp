// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "avground/annotations.hpp"
#include "avground/caption_metrics.hpp"
#include "avground/error.hpp"
#include "avground/harness.hpp"
#include "avground/interleave.hpp"
#include "avground/qa_builder.hpp"
#include "avground/rewards.hpp"
#include "avground/timeline.hpp"
#include "caption_corpus.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"

using namespace avground;

namespace {

using Clock = std::chrono::steady_clock;

// Collects the first few failure messages of one criterion.
struct Check {
  std::size_t failures = 0;
  std::string first;

  void expect(bool ok, const std::string& what) {
    if (ok) return;
    if (failures++ == 0) first = what;
  }
};

int g_failed = 0;

void criterion(const char* name, double budget_s, const std::function<void(Check&)>& body) {
  Check check;
  const auto start = Clock::now();
  try {
    body(check);
  } catch (const std::exception& e) {
    check.expect(false, std::string("exception: ") + e.what());
  }
  const double elapsed = std::chrono::duration<double>(Clock::now() - start).count();
  if (elapsed > budget_s) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "took %.2f s, budget %.0f s", elapsed, budget_s);
    check.expect(false, buf);
  }
  const bool ok = check.failures == 0;
  if (!ok) ++g_failed;
  std::printf("%s  %-36s %7.2f s", ok ? "PASS" : "FAIL", name, elapsed);
  if (!ok) std::printf("  [%zu failure(s); first: %s]", check.failures, check.first.c_str());
  std::printf("\n");
  std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), f, a, b);
  return buf;
}

VideoAnnotation uniform_video(const std::string& id, double duration, std::size_t segments) {
  VideoAnnotation v;
  v.video_id = id;
  v.duration_s = duration;
  const double step = duration / static_cast<double>(segments);
  for (std::size_t i = 0; i < segments; ++i) {
    const double end = i + 1 == segments ? duration : step * static_cast<double>(i + 1);
    v.segments.push_back({TimeInterval(step * static_cast<double>(i), end), "a scene", "a sound"});
  }
  return v;
}

void timeline_fixture(Check& c) {
  const auto ts = sample_timeline(126.0, 64);
  c.expect(ts.size() == 64, "expected 64 stamps");
  for (std::size_t i = 0; i < ts.size(); ++i) {
    c.expect(ts[i].seconds() == 2.0 * static_cast<double>(i), "spacing is not 2.0 s at " + std::to_string(i));
    c.expect(render_timestamp(ts[i]) == "second{" + std::to_string(2 * i) + ".0}",
             "rendered " + render_timestamp(ts[i]));
  }
  std::ifstream in(AVGROUND_TEST_DATA_DIR "/interleave_126_64.golden");
  c.expect(static_cast<bool>(in), "golden file missing");
  std::stringstream golden;
  golden << in.rdbuf();
  c.expect(format_layout(build_sequence(126.0, 64, 1, 1)) == golden.str(), "layout differs from golden file");
}

void iou_suite(Check& c) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> ms(0, 600'000);
  for (int n = 0; n < 10'000; ++n) {
    int a0 = ms(rng), a1 = ms(rng), b0 = ms(rng), b1 = ms(rng);
    if (a0 > a1) std::swap(a0, a1);
    if (b0 > b1) std::swap(b0, b1);
    if (a0 == a1) ++a1;
    if (b0 == b1) ++b1;
    const TimeInterval a(a0 / 1000.0, a1 / 1000.0), b(b0 / 1000.0, b1 / 1000.0);
    const double ab = iou(a, b);
    c.expect(ab == iou(b, a), "asymmetric");
    c.expect(ab >= 0.0 && ab <= 1.0, fmt("out of bounds: %g", ab));
    c.expect(iou(a, a) == 1.0, "identity != 1");
    if (a1 <= b0 || b1 <= a0) c.expect(ab == 0.0, "disjoint != 0");
    const double bins = oracle::iou_bins_ms(a0, a1, b0, b1);
    c.expect(std::abs(ab - bins) <= 1e-3, fmt("bin oracle %g vs %g", bins, ab));
  }
}

void metric_oracles(Check& c) {
  std::vector<TokenizedCaption> refs;
  for (const auto& [p, r] : testing_support::kCaptionPairs) refs.push_back(tokenize(r));
  const auto corpus = build_idf_corpus(refs);
  std::vector<oracle::Tokens> odocs;
  for (const auto& r : refs) odocs.push_back(r.tokens());
  const auto stem = [](const std::string& w) { return porter_stem(w); };
  for (std::size_t i = 0; i < refs.size(); ++i) {
    const auto pred = tokenize(testing_support::kCaptionPairs[i].first);
    const std::span<const TokenizedCaption> ref(&refs[i], 1);
    const std::string tag = " on pair " + std::to_string(i);
    c.expect(std::abs(bleu4(pred, ref) - oracle::bleu4(pred.tokens(), {odocs[i]})) <= 1e-6, "BLEU-4" + tag);
    c.expect(std::abs(rouge_l(pred, refs[i]) - oracle::rouge_l(pred.tokens(), odocs[i])) <= 1e-6, "ROUGE-L" + tag);
    c.expect(std::abs(meteor(pred, refs[i]) - oracle::meteor(pred.tokens(), odocs[i], stem)) <= 1e-6,
             "METEOR" + tag);
    c.expect(std::abs(cider(pred, ref, corpus) - oracle::cider(pred.tokens(), {odocs[i]}, odocs)) <= 1e-6,
             "CIDEr" + tag);
  }
}

std::string random_completion(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> tenths(0, 3000);
  switch (rng() % 5) {
    case 0:
    case 1: {
      const int a = tenths(rng), b = tenths(rng);
      return "second{" + std::to_string(a / 10) + "." + std::to_string(a % 10) + "}-second{" +
             std::to_string(b / 10) + "." + std::to_string(b % 10) + "}";
    }
    case 2:
      return "  second{" + std::to_string(tenths(rng)) + "}-second{" + std::to_string(tenths(rng)) + ".25}\n";
    case 3:
      return "The answer is second{1.0}-second{" + std::to_string(tenths(rng)) + ".0}";
    default:
      return testing_support::random_caption(rng, 0, 12);
  }
}

void reward_consistency(Check& c) {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> tenths(0, 3000);
  for (int n = 0; n < 1000; ++n) {
    const std::string completion = random_completion(rng);
    const std::string caption = testing_support::random_caption(rng, 1, 14);
    c.expect(reward_meteor(completion, caption) == meteor(tokenize(completion), tokenize(caption)),
             "reward_meteor != meteor for '" + completion + "'");
    int g0 = tenths(rng), g1 = tenths(rng);
    if (g0 > g1) std::swap(g0, g1);
    const TimeInterval gt(g0 / 10.0, g1 / 10.0);
    const auto parsed = try_parse_interval(completion);
    const double expected = parsed ? iou(*parsed, gt) : 0.0;
    c.expect(reward_iou(completion, gt) == expected, "reward_iou != iou(parse) for '" + completion + "'");
  }
}

void advantage_properties(Check& c) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> value(-3.0, 3.0);
  std::uniform_real_distribution<double> scale(0.1, 50.0);
  for (int n = 0; n < 10'000; ++n) {
    std::array<double, 4> r{};
    for (auto& x : r) x = value(rng);
    const auto a = group_advantages(r, 4);
    c.expect(std::abs(std::accumulate(a.begin(), a.end(), 0.0)) <= 1e-9, "advantages do not sum to 0");
    const double shift = value(rng), k = scale(rng);
    std::array<double, 4> shifted = r, scaled = r;
    for (auto& x : shifted) x += shift;
    for (auto& x : scaled) x *= k;
    const auto as = group_advantages(shifted, 4);
    const auto ak = group_advantages(scaled, 4);
    for (std::size_t i = 0; i < 4; ++i) {
      c.expect(std::abs(as[i] - a[i]) <= 1e-6, "not shift invariant");
      c.expect(std::abs(ak[i] - a[i]) <= 1e-6, "not scale invariant");
    }
    const std::array<double, 4> flat = {r[0], r[0], r[0], r[0]};
    const auto af = group_advantages(flat, 4);
    c.expect(std::all_of(af.begin(), af.end(), [](double x) { return x == 0.0; }), "degenerate group not zeroed");
  }
}

void demo_learning(Check& c) {
  int learned = 0;
  std::string summary;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto t = run_grpo_demo(RewardConfig{}, seed, 1000);
    const bool ok = t.initial_reward() < 0.2 && t.final_reward() > 0.6;
    learned += ok;
    if (!ok) summary += fmt(" seed %.0f: %.3f -> ", static_cast<double>(seed), t.initial_reward()) +
                        fmt("%.3f;", t.final_reward());
  }
  c.expect(learned >= 9, std::to_string(learned) + "/10 seeds learned;" + summary);
}

void qa_construction(Check& c) {
  const auto corpus = testing_support::synthetic_corpus(2000, 12000);
  std::size_t segments = 0;
  for (const auto& v : corpus) {
    for (std::size_t i = 0; i < v.segments.size(); ++i, ++segments) {
      const auto pairs = build_qa(v, i);
      c.expect(pairs.size() == 6, "segment did not yield 6 pairs");
      for (std::size_t k = 0; k < pairs.size(); ++k) {
        c.expect(pairs[k].subtask == kAllSubtasks[k], "direction order");
        if (is_grounding(pairs[k].subtask)) {
          const auto back = parse_interval(pairs[k].answer).interval();
          c.expect(back && *back == v.segments[i].interval, "answer does not parse back: " + pairs[k].answer);
        }
      }
    }
  }
  const auto test_set = build_test_set(corpus, 7);
  c.expect(test_set.size() == 12'000, "test set has " + std::to_string(test_set.size()) + " pairs");
}

void harness_self_consistency(Check& c) {
  const auto qa = build_test_set(testing_support::synthetic_corpus(2000, 555), 3);
  std::vector<PredictionRecord> gold;
  gold.reserve(qa.size());
  for (const auto& q : qa) gold.push_back({q.qa_id, q.answer, std::nullopt, std::nullopt});
  const auto report = evaluate(qa, gold);
  c.expect(report.subtasks.size() == 6, "expected six subtask reports");
  for (const auto& sub : report.subtasks) {
    const std::string name(subtask_name(sub.subtask));
    const std::vector<std::pair<const char*, double>> expect =
        is_grounding(sub.subtask)
            ? std::vector<std::pair<const char*, double>>{{"R@0.5", 100.0}, {"R@0.7", 100.0}}
            : std::vector<std::pair<const char*, double>>{{"BLEU-4", 1.0}, {"ROUGE-L", 1.0}, {"METEOR", 1.0}};
    for (const auto& [metric, value] : expect) {
      const double got = sub.metrics.at(metric).value;
      c.expect(got == value, name + " " + metric + " = " + fmt("%.2f", got));
    }
  }
}

void pipeline_filters(Check& c) {
  struct Fixture {
    double duration;
    std::size_t segments;
    bool keep;
  };
  const Fixture fixtures[] = {
      {59.9, 10, false}, {60.0, 10, true},  {60.1, 10, true},  {599.9, 10, true}, {600.0, 10, true},
      {600.1, 10, false}, {300.0, 4, false}, {300.0, 5, true},  {300.0, 30, true}, {300.0, 31, false},
      {60.0, 5, true},   {600.0, 30, true},  {59.9, 4, false},  {600.1, 31, false},
  };
  std::vector<VideoAnnotation> annos;
  for (std::size_t i = 0; i < std::size(fixtures); ++i) {
    annos.push_back(uniform_video("f" + std::to_string(i), fixtures[i].duration, fixtures[i].segments));
  }
  const auto kept = filter_corpus(annos);
  std::vector<std::string> expected;
  for (std::size_t i = 0; i < std::size(fixtures); ++i) {
    if (fixtures[i].keep) expected.push_back(annos[i].video_id);
  }
  std::vector<std::string> got;
  for (const auto& v : kept) got.push_back(v.video_id);
  c.expect(got == expected, "kept " + std::to_string(got.size()) + " of expected " + std::to_string(expected.size()));
}

void kappa(Check& c) {
  c.expect(fleiss_kappa(AgreementTable({{3, 0, 0}, {0, 3, 0}, {0, 0, 3}, {3, 0, 0}})) == 1.0, "unanimity != 1");
  // P_bar = 5/12, P_e = 7/18, kappa = 1/22.
  const double k = fleiss_kappa(AgreementTable({{3, 0, 0}, {2, 1, 0}, {0, 2, 1}, {1, 1, 1}}));
  c.expect(std::abs(k - 1.0 / 22.0) <= 1e-9, fmt("mixed table kappa %.12f", k));
}

}  // namespace

int main() {
  criterion("timestamp/interleave fixture", 1.0, timeline_fixture);
  criterion("IoU suite", 10.0, iou_suite);
  criterion("metric oracle equivalence", 5.0, metric_oracles);
  criterion("reward/metric consistency", 60.0, reward_consistency);
  criterion("GRPO advantage properties", 5.0, advantage_properties);
  criterion("GRPO demo learning", 60.0, demo_learning);
  criterion("QA construction", 10.0, qa_construction);
  criterion("harness self-consistency", 10.0, harness_self_consistency);
  criterion("pipeline filters", 60.0, pipeline_filters);
  criterion("Fleiss' kappa", 60.0, kappa);
  std::printf("%d of 10 criteria failed\n", g_failed);
  return g_failed == 0 ? 0 : 1;
}
