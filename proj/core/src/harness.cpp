#include "avground/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "avground/caption_metrics.hpp"
#include "avground/error.hpp"
#include "avground/grounding_metrics.hpp"
#include "json.hpp"
#include "parallel.hpp"
#include "text_util.hpp"

namespace avground {

using json = nlohmann::json;  // std::map storage: sorted keys on output

namespace {

json parse_line(const std::string& line, std::size_t line_no) {
  try {
    auto rec = json::parse(line);
    if (!rec.is_object()) throw SchemaError("record must be a JSON object", line_no);
    return rec;
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("invalid JSON: ") + e.what(), line_no);
  }
}

std::string string_field(const json& rec, const char* key, std::size_t line_no) {
  auto it = rec.find(key);
  if (it == rec.end()) throw SchemaError(std::string("missing field '") + key + "'", line_no);
  if (!it->is_string()) throw SchemaError(std::string("field '") + key + "' must be a string", line_no);
  return it->get<std::string>();
}

template <typename Fn>
void for_each_record(std::istream& in, Fn&& fn) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (detail::trim(line).empty()) continue;
    fn(parse_line(line, line_no), line_no);
  }
}

std::string threshold_key(double t) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), t);
  (void)ec;
  return "R@" + std::string(buf, ptr);
}

constexpr const char* kBleu = "BLEU-4";
constexpr const char* kRouge = "ROUGE-L";
constexpr const char* kMeteor = "METEOR";
constexpr const char* kCider = "CIDEr";
constexpr const char* kMiou = "mIoU";

}  // namespace

// --- predictions ----------------------------------------------------------

std::string serialize_prediction(const PredictionRecord& rec) {
  nlohmann::ordered_json out = nlohmann::ordered_json::object();
  out["qa_id"] = rec.qa_id;
  out["prediction"] = rec.prediction;
  if (rec.error) out["error"] = *rec.error;
  if (rec.decode) out["decode"] = nlohmann::ordered_json::parse(*rec.decode);
  return out.dump();
}

std::vector<PredictionRecord> parse_predictions(std::istream& in) {
  std::vector<PredictionRecord> out;
  std::set<std::string> seen;
  for_each_record(in, [&](const json& rec, std::size_t line_no) {
    PredictionRecord p;
    p.qa_id = string_field(rec, "qa_id", line_no);
    p.prediction = string_field(rec, "prediction", line_no);
    if (auto it = rec.find("error"); it != rec.end() && it->is_string()) p.error = it->get<std::string>();
    if (auto it = rec.find("decode"); it != rec.end() && !it->is_null()) p.decode = it->dump();
    if (!seen.insert(p.qa_id).second) {
      throw SchemaError("duplicate prediction for qa_id '" + p.qa_id + "'", line_no);
    }
    out.push_back(std::move(p));
  });
  return out;
}

std::vector<PredictionRecord> load_predictions(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open predictions file: " + path.string());
  return parse_predictions(in);
}

// --- evaluation -----------------------------------------------------------

const SubtaskReport* EvalReport::find(Subtask s) const {
  for (const auto& r : subtasks) {
    if (r.subtask == s) return &r;
  }
  return nullptr;
}

EvalReport evaluate(std::span<const QaPair> qa, std::span<const PredictionRecord> predictions,
                    const EvalOptions& options) {
  std::vector<const QaPair*> order;
  order.reserve(qa.size());
  std::unordered_map<std::string, const QaPair*> by_id;
  for (const auto& q : qa) {
    if (!by_id.emplace(q.qa_id, &q).second) throw SchemaError("duplicate qa_id '" + q.qa_id + "'");
    order.push_back(&q);
  }
  std::sort(order.begin(), order.end(), [](auto* a, auto* b) { return a->qa_id < b->qa_id; });

  std::unordered_map<std::string, const PredictionRecord*> pred_by_id;
  std::optional<std::string> decode;
  for (const auto& p : predictions) {
    if (!by_id.count(p.qa_id)) throw UnresolvedQaId("prediction for unknown qa_id '" + p.qa_id + "'");
    if (!pred_by_id.emplace(p.qa_id, &p).second) {
      throw SchemaError("duplicate prediction for qa_id '" + p.qa_id + "'");
    }
    if (p.decode && !decode) decode = p.decode;
  }

  EvalReport report;
  report.label = options.label;
  report.total_samples = qa.size();
  {
    std::string thresholds;
    for (double t : options.iou_thresholds) {
      if (!thresholds.empty()) thresholds += ',';
      thresholds += threshold_key(t).substr(2);
    }
    report.config["iou_thresholds"] = thresholds;
    std::ostringstream cfg;
    cfg << options.metrics.rouge_beta;
    report.config["rouge_beta"] = cfg.str();
    cfg.str("");
    cfg << options.metrics.bleu_epsilon;
    report.config["bleu_epsilon"] = cfg.str();
    report.config["meteor_stages"] = "exact,porter_stem";
    report.config["cider_idf"] = "per-subtask answers";
    if (decode) report.config["decode"] = *decode;
  }

  for (Subtask s : kAllSubtasks) {
    std::vector<const QaPair*> items;
    for (auto* q : order) {
      if (q->subtask == s) items.push_back(q);
    }
    if (items.empty()) continue;

    SubtaskReport sub;
    sub.subtask = s;
    sub.samples = items.size();
    std::vector<const PredictionRecord*> preds(items.size(), nullptr);
    for (std::size_t i = 0; i < items.size(); ++i) {
      auto it = pred_by_id.find(items[i]->qa_id);
      if (it == pred_by_id.end()) {
        ++sub.missing;
      } else {
        preds[i] = it->second;
      }
    }

    std::vector<std::string> texts(items.size());
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (!preds[i]) continue;
      texts[i] = options.normalizer ? options.normalizer(preds[i]->prediction, s) : preds[i]->prediction;
    }

    if (is_grounding(s)) {
      std::vector<GroundingResult> results;
      results.reserve(items.size());
      for (std::size_t i = 0; i < items.size(); ++i) {
        GroundingResult r{items[i]->qa_id, std::nullopt, items[i]->interval};
        if (preds[i]) {
          r.pred = try_parse_interval(texts[i]);
          if (!r.pred) ++sub.parse_failures;
        }
        results.push_back(std::move(r));
      }
      for (double t : options.iou_thresholds) {
        sub.metrics[threshold_key(t)] = {detail::round2(recall_at_iou(results, t)), results.size()};
      }
      sub.metrics[kMiou] = {detail::round2(mean_iou(results)), results.size()};
    } else {
      std::vector<TokenizedCaption> refs, hyps;
      refs.reserve(items.size());
      hyps.reserve(items.size());
      for (std::size_t i = 0; i < items.size(); ++i) {
        refs.push_back(tokenize(items[i]->answer));
        hyps.push_back(preds[i] ? tokenize(texts[i]) : TokenizedCaption());
      }
      const auto corpus = build_idf_corpus(refs, options.metrics.max_ngram);
      std::vector<std::array<double, 4>> scores(items.size());
      detail::parallel_for(
          items.size(),
          [&](std::size_t i) {
            const std::span<const TokenizedCaption> ref(&refs[i], 1);
            scores[i] = {bleu4(hyps[i], ref, options.metrics),
                         rouge_l(hyps[i], refs[i], options.metrics),
                         meteor(hyps[i], refs[i], options.metrics),
                         cider(hyps[i], ref, corpus, options.metrics)};
          },
          options.threads);
      std::array<double, 4> sums{};
      for (const auto& sc : scores) {
        for (std::size_t k = 0; k < 4; ++k) sums[k] += sc[k];
      }
      const auto n = static_cast<double>(items.size());
      sub.metrics[kBleu] = {detail::round2(sums[0] / n), items.size()};
      sub.metrics[kRouge] = {detail::round2(sums[1] / n), items.size()};
      sub.metrics[kMeteor] = {detail::round2(sums[2] / n), items.size()};
      sub.metrics[kCider] = {detail::round2(sums[3] / n), items.size()};
    }
    report.missing_predictions += sub.missing;
    report.subtasks.push_back(std::move(sub));
  }

  if (predictions.empty() && !qa.empty()) {
    report.warnings.push_back("no predictions supplied; every QA scored as a miss");
  } else if (report.missing_predictions > 0) {
    report.warnings.push_back(std::to_string(report.missing_predictions) +
                              " QA pairs had no prediction and were scored as misses");
  }
  return report;
}

EvalReport evaluate(const std::filesystem::path& qa_path,
                    const std::filesystem::path& predictions_path, const EvalOptions& options) {
  const auto qa = load_qa(qa_path);
  const auto preds = load_predictions(predictions_path);
  return evaluate(qa, preds, options);
}

// --- report emission ------------------------------------------------------

ReportFormat report_format_from_name(std::string_view name) {
  if (name == "json") return ReportFormat::kJson;
  if (name == "markdown" || name == "md") return ReportFormat::kMarkdown;
  throw InvalidArgument("unknown report format '" + std::string(name) + "'");
}

std::string report_to_json(const EvalReport& report) {
  json out = json::object();
  out["label"] = report.label;
  out["total_samples"] = report.total_samples;
  out["missing_predictions"] = report.missing_predictions;
  out["config"] = report.config;
  out["warnings"] = report.warnings;
  json subs = json::object();
  for (const auto& s : report.subtasks) {
    json metrics = json::object();
    for (const auto& [name, m] : s.metrics) {
      metrics[name] = {{"value", detail::round2(m.value)}, {"samples", m.samples}};
    }
    subs[std::string(subtask_name(s.subtask))] = {{"samples", s.samples},
                                                  {"missing", s.missing},
                                                  {"parse_failures", s.parse_failures},
                                                  {"metrics", std::move(metrics)}};
  }
  out["subtasks"] = std::move(subs);
  return out.dump(2);
}

EvalReport report_from_json(std::string_view text) {
  json in;
  try {
    in = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("invalid report JSON: ") + e.what());
  }
  try {
    EvalReport r;
    r.label = in.at("label").get<std::string>();
    r.total_samples = in.at("total_samples").get<std::size_t>();
    r.missing_predictions = in.at("missing_predictions").get<std::size_t>();
    r.config = in.at("config").get<std::map<std::string, std::string>>();
    r.warnings = in.at("warnings").get<std::vector<std::string>>();
    const auto& subs = in.at("subtasks");
    for (Subtask s : kAllSubtasks) {
      auto it = subs.find(std::string(subtask_name(s)));
      if (it == subs.end()) continue;
      SubtaskReport sub;
      sub.subtask = s;
      sub.samples = it->at("samples").get<std::size_t>();
      sub.missing = it->at("missing").get<std::size_t>();
      sub.parse_failures = it->at("parse_failures").get<std::size_t>();
      for (const auto& [name, m] : it->at("metrics").items()) {
        sub.metrics[name] = {m.at("value").get<double>(), m.at("samples").get<std::size_t>()};
      }
      r.subtasks.push_back(std::move(sub));
    }
    return r;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed report: ") + e.what());
  }
}

std::string report_to_markdown(std::span<const EvalReport> reports) {
  struct Column {
    Subtask subtask;
    std::string metric;
    std::string header;
  };
  std::vector<Column> columns;
  for (Subtask s : kAllSubtasks) {
    std::string upper(subtask_name(s));
    std::transform(upper.begin(), upper.end(), upper.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    if (is_grounding(s)) {
      // Union of recall thresholds used by any report, in key order.
      std::set<std::string> keys;
      for (const auto& r : reports) {
        if (const auto* sub = r.find(s)) {
          for (const auto& [name, m] : sub->metrics) {
            if (name.rfind("R@", 0) == 0) keys.insert(name);
          }
        }
      }
      if (keys.empty()) keys = {"R@0.5", "R@0.7"};
      for (const auto& k : keys) columns.push_back({s, k, upper + " " + k});
      columns.push_back({s, kMiou, upper + " mIoU"});
    } else {
      columns.push_back({s, kBleu, upper + " B"});
      columns.push_back({s, kRouge, upper + " R"});
      columns.push_back({s, kMeteor, upper + " M"});
      columns.push_back({s, kCider, upper + " C"});
    }
  }

  std::ostringstream out;
  out << "| Model |";
  for (const auto& c : columns) out << ' ' << c.header << " |";
  out << "\n|---|";
  for (std::size_t i = 0; i < columns.size(); ++i) out << "---:|";
  out << '\n';
  for (const auto& r : reports) {
    out << "| " << r.label << " |";
    for (const auto& c : columns) {
      const MetricValue* value = nullptr;
      if (const auto* sub = r.find(c.subtask)) {
        if (auto it = sub->metrics.find(c.metric); it != sub->metrics.end()) value = &it->second;
      }
      if (!value) {
        out << " - |";
        continue;
      }
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.2f", value->value);
      out << ' ' << buf << " |";
    }
    out << '\n';
  }
  return out.str();
}

std::string emit_report(const EvalReport& report, ReportFormat format) {
  if (format == ReportFormat::kJson) return report_to_json(report) + "\n";
  return report_to_markdown(std::span(&report, 1));
}

// --- rewards over files ---------------------------------------------------

std::vector<CompletionRecord> parse_completions(std::istream& in) {
  std::vector<CompletionRecord> out;
  for_each_record(in, [&](const json& rec, std::size_t line_no) {
    out.push_back({string_field(rec, "qa_id", line_no), string_field(rec, "completion", line_no)});
  });
  return out;
}

std::vector<GroupScore> score_completions(std::span<const QaPair> qa,
                                          std::span<const CompletionRecord> completions,
                                          const RewardConfig& config, const WeightTable& weights) {
  std::unordered_map<std::string, const QaPair*> by_id;
  for (const auto& q : qa) by_id.emplace(q.qa_id, &q);

  std::vector<std::string> order;
  std::unordered_map<std::string, std::vector<std::string>> groups;
  for (const auto& c : completions) {
    if (!by_id.count(c.qa_id)) throw UnresolvedQaId("completion for unknown qa_id '" + c.qa_id + "'");
    auto [it, inserted] = groups.try_emplace(c.qa_id);
    if (inserted) order.push_back(c.qa_id);
    it->second.push_back(c.completion);
  }

  std::vector<GroupScore> out;
  out.reserve(order.size());
  for (const auto& id : order) {
    const QaPair& target = *by_id.at(id);
    auto batch = score_group(groups.at(id), target, config, weights);
    out.push_back({id, target.subtask, std::move(batch.rewards), std::move(batch.advantages)});
  }
  return out;
}

std::string serialize_group_score(const GroupScore& g) {
  nlohmann::ordered_json out = nlohmann::ordered_json::object();
  out["qa_id"] = g.qa_id;
  out["subtask"] = subtask_name(g.subtask);
  out["rewards"] = g.rewards;
  out["advantages"] = g.advantages;
  return out.dump();
}

}  // namespace avground
