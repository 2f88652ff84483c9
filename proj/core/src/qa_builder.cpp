#include "avground/qa_builder.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <tuple>

#include "avground/error.hpp"
#include "json.hpp"
#include "text_util.hpp"

namespace avground {

using json = nlohmann::ordered_json;

namespace {

constexpr std::array<std::string_view, 6> kNames = {"v2t", "t2v", "a2t", "t2a", "v2a", "a2v"};

std::size_t slot(Subtask s) { return static_cast<std::size_t>(s); }

std::string replace_all(std::string text, std::string_view key, std::string_view value) {
  for (auto pos = text.find(key); pos != std::string::npos; pos = text.find(key, pos + value.size())) {
    text.replace(pos, key.size(), value);
  }
  return text;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string one_line(std::string_view s) {
  std::string out(s);
  std::replace(out.begin(), out.end(), '\n', ' ');
  std::replace(out.begin(), out.end(), '\r', ' ');
  return out;
}

}  // namespace

std::string_view subtask_name(Subtask s) { return kNames[slot(s)]; }

Subtask subtask_from_name(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (lower == kNames[i]) return kAllSubtasks[i];
  }
  throw UnknownSubtask("unknown subtask '" + std::string(name) + "'");
}

TemplateRegistry::TemplateRegistry() {
  sets_.push_back(TemplateSet{
      std::string(kDefaultTemplateSet),
      {
          "When does the following visual event occur? {caption} "
          "Answer with second{start}-second{end}.",
          "Describe the visual content during {interval}.",
          "When does the following audio event occur? {caption} "
          "Answer with second{start}-second{end}.",
          "Describe the audio content during {interval}.",
          "What can be heard while the following is shown? {caption}",
          "What can be seen while the following is heard? {caption}",
      }});
}

TemplateRegistry& TemplateRegistry::instance() {
  static TemplateRegistry registry;
  return registry;
}

void TemplateRegistry::add(TemplateSet set) {
  auto it = std::find_if(sets_.begin(), sets_.end(), [&](const auto& s) { return s.id == set.id; });
  if (it != sets_.end()) {
    *it = std::move(set);
  } else {
    sets_.push_back(std::move(set));
  }
}

const TemplateSet& TemplateRegistry::get(std::string_view id) const {
  auto it = std::find_if(sets_.begin(), sets_.end(), [&](const auto& s) { return s.id == id; });
  if (it == sets_.end()) throw InvalidArgument("unknown template set '" + std::string(id) + "'");
  return *it;
}

std::vector<QaPair> build_qa(const VideoAnnotation& anno, std::size_t segment_index,
                             std::string_view template_set) {
  if (segment_index >= anno.segments.size()) {
    throw IndexOutOfRange("segment index " + std::to_string(segment_index) + " out of range for '" +
                          anno.video_id + "' with " + std::to_string(anno.segments.size()) +
                          " segments");
  }
  const auto& templates = TemplateRegistry::instance().get(template_set);
  const auto& seg = anno.segments[segment_index];
  const std::string interval = render_interval(seg.interval);

  std::vector<QaPair> out;
  out.reserve(kAllSubtasks.size());
  for (Subtask s : kAllSubtasks) {
    std::string_view query;
    std::string answer;
    switch (s) {
      case Subtask::kV2T: query = seg.video_caption; answer = interval; break;
      case Subtask::kA2T: query = seg.audio_caption; answer = interval; break;
      case Subtask::kT2V: answer = seg.video_caption; break;
      case Subtask::kT2A: answer = seg.audio_caption; break;
      case Subtask::kV2A: query = seg.video_caption; answer = seg.audio_caption; break;
      case Subtask::kA2V: query = seg.audio_caption; answer = seg.video_caption; break;
    }
    std::string question = replace_all(templates.questions[slot(s)], "{caption}", query);
    question = replace_all(std::move(question), "{interval}", interval);

    QaPair qa;
    qa.qa_id = anno.video_id + "/" + std::to_string(segment_index) + "/" + std::string(subtask_name(s));
    qa.video_id = anno.video_id;
    qa.subtask = s;
    qa.question = std::move(question);
    qa.answer = std::move(answer);
    qa.interval = seg.interval;
    out.push_back(std::move(qa));
  }
  return out;
}

std::size_t select_test_segment(const VideoAnnotation& anno, std::uint64_t seed) {
  if (anno.segments.empty()) throw EmptyAnnotation("video '" + anno.video_id + "' has no segments");
  const std::uint64_t x = splitmix64(fnv1a(anno.video_id) ^ splitmix64(seed));
  return static_cast<std::size_t>(x % anno.segments.size());
}

std::vector<QaPair> build_test_set(std::span<const VideoAnnotation> annos, std::uint64_t seed,
                                   std::string_view template_set) {
  std::vector<QaPair> out;
  out.reserve(annos.size() * kAllSubtasks.size());
  for (const auto& anno : annos) {
    auto pairs = build_qa(anno, select_test_segment(anno, seed), template_set);
    std::move(pairs.begin(), pairs.end(), std::back_inserter(out));
  }
  return out;
}

std::string build_dense_caption_target(const VideoAnnotation& anno) {
  std::string out;
  for (std::size_t i = 0; i < anno.segments.size(); ++i) {
    const auto& seg = anno.segments[i];
    if (i) out += '\n';
    out += render_interval(seg.interval);
    out += " | V: " + one_line(seg.video_caption);
    out += " | A: " + one_line(seg.audio_caption);
  }
  return out;
}

std::vector<SegmentAnnotation> parse_dense_caption_target(std::string_view text) {
  std::vector<SegmentAnnotation> out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view() : text.substr(nl + 1);
    ++line_no;
    if (detail::trim(line).empty()) continue;

    const auto v = line.find(" | V: ");
    const auto a = line.rfind(" | A: ");
    if (v == std::string_view::npos || a == std::string_view::npos || a < v) {
      throw SchemaError("expected '<interval> | V: <caption> | A: <caption>'", line_no);
    }
    auto parsed = try_parse_interval(line.substr(0, v));
    if (!parsed || parsed->reversed()) throw SchemaError("bad interval", line_no);
    out.push_back({*parsed->interval(), std::string(line.substr(v + 6, a - v - 6)),
                   std::string(line.substr(a + 6))});
  }
  return out;
}

std::string serialize_qa(const QaPair& qa) {
  json rec = json::object();
  rec["qa_id"] = qa.qa_id;
  rec["video_id"] = qa.video_id;
  rec["subtask"] = subtask_name(qa.subtask);
  rec["question"] = qa.question;
  rec["answer"] = qa.answer;
  rec["interval"] = json::array({qa.interval.start().seconds(), qa.interval.end().seconds()});
  if (qa.video_ref) rec["video_ref"] = *qa.video_ref;
  if (qa.audio_ref) rec["audio_ref"] = *qa.audio_ref;
  return rec.dump();
}

void write_qa(std::ostream& out, std::span<const QaPair> pairs) {
  for (const auto& qa : pairs) out << serialize_qa(qa) << '\n';
}

namespace {

std::string field_string(const json& rec, const char* key, std::size_t line) {
  auto it = rec.find(key);
  if (it == rec.end()) throw SchemaError(std::string("missing field '") + key + "'", line);
  if (!it->is_string()) throw SchemaError(std::string("field '") + key + "' must be a string", line);
  return it->get<std::string>();
}

std::optional<std::string> optional_string(const json& rec, const char* key, std::size_t line) {
  auto it = rec.find(key);
  if (it == rec.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw SchemaError(std::string("field '") + key + "' must be a string", line);
  return it->get<std::string>();
}

}  // namespace

std::vector<QaPair> parse_qa(std::istream& in) {
  std::vector<QaPair> out;
  std::set<std::string> ids;
  std::set<std::tuple<std::string, double, double, Subtask>> keys;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (detail::trim(line).empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      throw SchemaError(std::string("invalid JSON: ") + e.what(), line_no);
    }
    if (!rec.is_object()) throw SchemaError("record must be a JSON object", line_no);

    QaPair qa;
    qa.qa_id = field_string(rec, "qa_id", line_no);
    qa.video_id = field_string(rec, "video_id", line_no);
    try {
      qa.subtask = subtask_from_name(field_string(rec, "subtask", line_no));
    } catch (const UnknownSubtask& e) {
      throw SchemaError(e.what(), line_no);
    }
    qa.question = field_string(rec, "question", line_no);
    qa.answer = field_string(rec, "answer", line_no);
    auto iv = rec.find("interval");
    if (iv == rec.end()) throw SchemaError("missing field 'interval'", line_no);
    if (!iv->is_array() || iv->size() != 2 || !(*iv)[0].is_number() || !(*iv)[1].is_number()) {
      throw SchemaError("field 'interval' must be [number, number]", line_no);
    }
    try {
      qa.interval = TimeInterval((*iv)[0].get<double>(), (*iv)[1].get<double>());
    } catch (const InvalidArgument& e) {
      throw ValidationError(e.what(), line_no);
    }
    qa.video_ref = optional_string(rec, "video_ref", line_no);
    qa.audio_ref = optional_string(rec, "audio_ref", line_no);

    if (!ids.insert(qa.qa_id).second) {
      throw ValidationError("duplicate qa_id '" + qa.qa_id + "'", line_no);
    }
    if (!keys.emplace(qa.video_id, qa.interval.start().seconds(), qa.interval.end().seconds(),
                      qa.subtask).second) {
      throw ValidationError("duplicate (video_id, interval, subtask) for '" + qa.qa_id + "'", line_no);
    }
    out.push_back(std::move(qa));
  }
  return out;
}

std::vector<QaPair> load_qa(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open QA file: " + path.string());
  return parse_qa(in);
}

}  // namespace avground
