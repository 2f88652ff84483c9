#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "avground/annotations.hpp"
#include "avground/error.hpp"
#include "avground/harness.hpp"
#include "avground/interleave.hpp"
#include "avground/qa_builder.hpp"
#include "avground/rewards.hpp"
#include "json.hpp"

namespace {

using namespace avground;

// Writes to `path`, or stdout when it is empty or "-".
void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out << text;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return in;
}

struct BuildQaArgs {
  std::string annotations, out, template_set = std::string(kDefaultTemplateSet);
  std::uint64_t seed = 0;
  bool no_filter = false;
  bool all_segments = false;
  CorpusFilter filter;
};

int run_build_qa(const BuildQaArgs& a) {
  const auto loaded = load_annotations(a.annotations);
  for (const auto& w : loaded.warnings) std::cerr << "warning: line " << w.line << ": " << w.message << '\n';
  const auto kept = a.no_filter ? loaded.annotations : filter_corpus(loaded.annotations, a.filter);

  std::vector<QaPair> pairs;
  if (a.all_segments) {
    for (const auto& v : kept) {
      for (std::size_t i = 0; i < v.segments.size(); ++i) {
        auto p = build_qa(v, i, a.template_set);
        pairs.insert(pairs.end(), p.begin(), p.end());
      }
    }
  } else {
    pairs = build_test_set(kept, a.seed, a.template_set);
  }
  std::ostringstream out;
  write_qa(out, pairs);
  write_output(a.out, out.str());
  std::cerr << loaded.annotations.size() << " videos read, " << kept.size() << " kept, " << pairs.size()
            << " QA pairs written\n";
  return 0;
}

struct EvalArgs {
  std::string qa, predictions, out, format = "json", label = "model";
  std::vector<double> thresholds = {0.5, 0.7};
  std::size_t threads = 0;
};

int run_eval(const EvalArgs& a) {
  EvalOptions opt;
  opt.label = a.label;
  opt.iou_thresholds = a.thresholds;
  opt.threads = a.threads;
  const auto report = evaluate(a.qa, a.predictions, opt);
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
  write_output(a.out, emit_report(report, report_format_from_name(a.format)));
  return 0;
}

struct CollectArgs {
  std::string qa, out, endpoint;
  std::size_t concurrency = 4, retries = 2;
  double timeout_s = 60.0;
};

int run_collect(const CollectArgs& a) {
  CollectOptions opt;
  opt.endpoint = a.endpoint.empty() ? default_endpoint().value_or("") : a.endpoint;
  if (opt.endpoint.empty()) throw InvalidArgument("no endpoint: pass --endpoint or set CHRONUS_ENDPOINT");
  opt.concurrency = a.concurrency;
  opt.retries = a.retries;
  opt.timeout = std::chrono::duration<double>(a.timeout_s);
  const auto qa = load_qa(a.qa);
  const auto stats = collect_predictions(qa, a.out, opt);
  std::cerr << stats.total << " QA pairs: " << stats.skipped << " already collected, " << stats.succeeded
            << " collected, " << stats.failed << " failed\n";
  return stats.failed == 0 ? 0 : 2;
}

struct RewardArgs {
  std::string qa, completions, out;
  std::size_t group_size = 4;
};

int run_reward(const RewardArgs& a) {
  const auto qa = load_qa(a.qa);
  auto in = open_input(a.completions);
  const auto completions = parse_completions(in);
  RewardConfig cfg;
  cfg.group_size = a.group_size;
  cfg.validate();
  std::ostringstream out;
  for (const auto& g : score_completions(qa, completions, cfg)) out << serialize_group_score(g) << '\n';
  write_output(a.out, out.str());
  return 0;
}

struct InterleaveArgs {
  double duration = 0.0;
  std::size_t frames = 64, video_tokens = 1, audio_tps = 1;
  std::string out;
};

int run_interleave(const InterleaveArgs& a) {
  write_output(a.out, format_layout(build_sequence(a.duration, a.frames, a.video_tokens, a.audio_tps)));
  return 0;
}

struct MergeArgs {
  std::vector<double> boundaries, similarity;
  double threshold = 0.5;
  std::size_t max_segments = 30;
  std::string out;
};

int run_merge(const MergeArgs& a) {
  std::vector<Timestamp> b;
  b.reserve(a.boundaries.size());
  for (double t : a.boundaries) b.emplace_back(t);
  std::string text;
  for (const auto& t : merge_segments(b, a.similarity, a.threshold, a.max_segments)) {
    text += render_timestamp(t) + '\n';
  }
  write_output(a.out, text);
  return 0;
}

// One item per line, vote counts separated by whitespace or commas.
std::vector<std::vector<int>> read_table(std::istream& in) {
  std::vector<std::vector<int>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    for (char& c : line) {
      if (c == ',') c = ' ';
    }
    std::istringstream ss(line);
    std::vector<int> row;
    std::string tok;
    while (ss >> tok) {
      std::size_t used = 0;
      int v = 0;
      try {
        v = std::stoi(tok, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != tok.size()) throw SchemaError("not an integer: '" + tok + "'", line_no);
      row.push_back(v);
    }
    if (!row.empty()) rows.push_back(std::move(row));
  }
  return rows;
}

int run_kappa(const std::string& table_path, const std::string& out) {
  std::vector<std::vector<int>> rows;
  if (table_path.empty() || table_path == "-") {
    rows = read_table(std::cin);
  } else {
    auto in = open_input(table_path);
    rows = read_table(in);
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f\n", fleiss_kappa(AgreementTable(std::move(rows))));
  write_output(out, buf);
  return 0;
}

struct DemoArgs {
  std::uint64_t seed = 1;
  std::size_t iterations = 1000;
  RewardConfig config;
  bool trace = false;
  std::string out;
};

int run_demo(const DemoArgs& a) {
  const auto t = run_grpo_demo(a.config, a.seed, a.iterations);
  nlohmann::ordered_json j;
  j["seed"] = a.seed;
  j["iterations"] = a.iterations;
  j["initial_reward"] = t.initial_reward();
  j["final_reward"] = t.final_reward();
  if (a.trace) j["mean_reward"] = t.mean_reward;
  write_output(a.out, j.dump() + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Temporal grounding toolkit: QA construction, evaluation, rewards"};
  app.require_subcommand(1);
  int status = 0;

  BuildQaArgs bq;
  auto* build = app.add_subcommand("build-qa", "Build six-direction QA pairs from annotations.jsonl");
  build->add_option("--annotations", bq.annotations, "annotations.jsonl")->required()->check(CLI::ExistingFile);
  build->add_option("--out", bq.out, "qa.jsonl (default stdout)");
  build->add_option("--seed", bq.seed, "held-out segment selection seed")->capture_default_str();
  build->add_option("--template-set", bq.template_set, "question template set")->capture_default_str();
  build->add_flag("--no-filter", bq.no_filter, "skip the duration / segment-count filter");
  build->add_flag("--all-segments", bq.all_segments, "emit pairs for every segment, not one per video");
  build->add_option("--min-duration", bq.filter.min_duration_s)->capture_default_str();
  build->add_option("--max-duration", bq.filter.max_duration_s)->capture_default_str();
  build->add_option("--min-segments", bq.filter.min_segments)->capture_default_str();
  build->add_option("--max-segments", bq.filter.max_segments)->capture_default_str();
  build->callback([&] { status = run_build_qa(bq); });

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "Score predictions against a QA file");
  eval->add_option("--qa", ev.qa)->required()->check(CLI::ExistingFile);
  eval->add_option("--predictions", ev.predictions)->required()->check(CLI::ExistingFile);
  eval->add_option("--format", ev.format, "json | markdown")->capture_default_str();
  eval->add_option("--label", ev.label, "model-run label in the report")->capture_default_str();
  eval->add_option("--iou-thresholds", ev.thresholds)->delimiter(',')->capture_default_str();
  eval->add_option("--threads", ev.threads, "0 = all cores")->capture_default_str();
  eval->add_option("--out", ev.out, "report path (default stdout)");
  eval->callback([&] { status = run_eval(ev); });

  CollectArgs co;
  auto* collect = app.add_subcommand("collect", "Query a model endpoint for every QA pair (resumable)");
  collect->add_option("--qa", co.qa)->required()->check(CLI::ExistingFile);
  collect->add_option("--out", co.out, "predictions.jsonl")->required();
  collect->add_option("--endpoint", co.endpoint, "http://host:port/path (default $CHRONUS_ENDPOINT)");
  collect->add_option("--concurrency", co.concurrency)->capture_default_str()->check(CLI::PositiveNumber);
  collect->add_option("--timeout-s", co.timeout_s)->capture_default_str()->check(CLI::PositiveNumber);
  collect->add_option("--retries", co.retries)->capture_default_str();
  collect->callback([&] { status = run_collect(co); });

  RewardArgs rw;
  auto* reward = app.add_subcommand("reward", "Rewards and group advantages for sampled completions");
  reward->add_option("--qa", rw.qa)->required()->check(CLI::ExistingFile);
  reward->add_option("--completions", rw.completions, "{qa_id, completion} JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  reward->add_option("--group-size", rw.group_size)->capture_default_str();
  reward->add_option("--out", rw.out, "default stdout");
  reward->callback([&] { status = run_reward(rw); });

  InterleaveArgs il;
  auto* interleave = app.add_subcommand("interleave", "Print the time/video/audio block layout");
  interleave->add_option("--duration", il.duration, "seconds")->required();
  interleave->add_option("--frames", il.frames)->capture_default_str();
  interleave->add_option("--video-tokens", il.video_tokens, "tokens per frame")->capture_default_str();
  interleave->add_option("--audio-tps", il.audio_tps, "audio tokens per second")->capture_default_str();
  interleave->add_option("--out", il.out, "default stdout");
  interleave->callback([&] { status = run_interleave(il); });

  MergeArgs mg;
  auto* merge = app.add_subcommand("merge-segments", "Merge adjacent segments by similarity");
  merge->add_option("--boundaries", mg.boundaries, "t0,t1,...,tn in seconds")->required()->delimiter(',');
  merge->add_option("--similarity", mg.similarity, "n-1 adjacent scores")->delimiter(',');
  merge->add_option("--threshold", mg.threshold)->capture_default_str();
  merge->add_option("--max-segments", mg.max_segments)->capture_default_str();
  merge->add_option("--out", mg.out, "default stdout");
  merge->callback([&] { status = run_merge(mg); });

  std::string kappa_table, kappa_out;
  auto* kappa = app.add_subcommand("kappa", "Fleiss' kappa of an items x categories vote table");
  kappa->add_option("table", kappa_table, "one item per line (default stdin)");
  kappa->add_option("--out", kappa_out, "default stdout");
  kappa->callback([&] { status = run_kappa(kappa_table, kappa_out); });

  DemoArgs dm;
  auto* demo = app.add_subcommand("grpo-demo", "Run the synthetic interval-policy GRPO demo");
  demo->add_option("--seed", dm.seed)->capture_default_str();
  demo->add_option("--iterations", dm.iterations)->capture_default_str();
  demo->add_option("--group-size", dm.config.group_size)->capture_default_str();
  demo->add_option("--kl-beta", dm.config.kl_beta)->capture_default_str();
  demo->add_option("--temperature", dm.config.temperature)->capture_default_str();
  demo->add_flag("--trace", dm.trace, "include the per-iteration mean reward");
  demo->add_option("--out", dm.out, "default stdout");
  demo->callback([&] { status = run_demo(dm); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const avground::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return status;
}
