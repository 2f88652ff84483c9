#include "avground/annotations.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "avground/error.hpp"
#include "json.hpp"
#include "text_util.hpp"

namespace avground {

using json = nlohmann::ordered_json;

std::vector<Timestamp> VideoAnnotation::boundaries() const {
  std::vector<Timestamp> out;
  if (segments.empty()) return out;
  out.reserve(segments.size() + 1);
  for (const auto& seg : segments) out.push_back(seg.interval.start());
  out.push_back(segments.back().interval.end());
  return out;
}

void validate_annotation(const VideoAnnotation& anno, std::size_t line,
                         std::vector<LoadWarning>* warnings) {
  auto fail = [&](const std::string& msg) {
    throw ValidationError("video '" + anno.video_id + "': " + msg, line);
  };
  auto warn = [&](const std::string& msg) {
    if (warnings) warnings->push_back({line, "video '" + anno.video_id + "': " + msg});
  };

  if (anno.video_id.empty()) fail("empty video_id");
  if (!(anno.duration_s > 0.0) || !std::isfinite(anno.duration_s)) fail("duration_s must be positive");

  for (std::size_t i = 0; i < anno.segments.size(); ++i) {
    const auto& seg = anno.segments[i];
    const std::string where = "segment " + std::to_string(i) + ": ";
    if (detail::trim(seg.video_caption).empty()) fail(where + "empty video_caption");
    if (detail::trim(seg.audio_caption).empty()) fail(where + "empty audio_caption");
    if (seg.interval.end().seconds() > anno.duration_s + kOverlapToleranceS) {
      fail(where + "ends after the video duration");
    }
    if (i == 0) continue;
    const auto& prev = anno.segments[i - 1];
    if (seg.interval.start() < prev.interval.start()) fail(where + "segments not sorted by start");
    const double gap = seg.interval.start().seconds() - prev.interval.end().seconds();
    if (gap < -kOverlapToleranceS) {
      fail(where + "overlaps previous segment by " + std::to_string(-gap) + " s");
    } else if (gap < 0.0) {
      warn(where + "overlaps previous segment by " + std::to_string(-gap) + " s (tolerated)");
    } else if (gap > 0.0) {
      warn(where + "gap of " + std::to_string(gap) + " s after previous segment");
    }
  }
}

namespace {

const json& require(const json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError(std::string("missing field '") + key + "'", line);
  return *it;
}

double require_number(const json& obj, const char* key, std::size_t line) {
  const auto& v = require(obj, key, line);
  if (!v.is_number()) throw SchemaError(std::string("field '") + key + "' must be a number", line);
  return v.get<double>();
}

std::string require_string(const json& obj, const char* key, std::size_t line) {
  const auto& v = require(obj, key, line);
  if (!v.is_string()) throw SchemaError(std::string("field '") + key + "' must be a string", line);
  return v.get<std::string>();
}

VideoAnnotation annotation_from_json(const json& rec, std::size_t line) {
  if (!rec.is_object()) throw SchemaError("record must be a JSON object", line);
  VideoAnnotation anno;
  anno.video_id = require_string(rec, "video_id", line);
  anno.duration_s = require_number(rec, "duration_s", line);
  if (auto it = rec.find("domain"); it != rec.end() && !it->is_null()) {
    if (!it->is_string()) throw SchemaError("field 'domain' must be a string", line);
    anno.domain = it->get<std::string>();
  }
  const auto& segs = require(rec, "segments", line);
  if (!segs.is_array()) throw SchemaError("field 'segments' must be an array", line);
  anno.segments.reserve(segs.size());
  for (const auto& s : segs) {
    if (!s.is_object()) throw SchemaError("segment must be a JSON object", line);
    const double start = require_number(s, "start_s", line);
    const double end = require_number(s, "end_s", line);
    std::string vc = require_string(s, "video_caption", line);
    std::string ac = require_string(s, "audio_caption", line);
    if (!std::isfinite(start) || start < 0.0) {
      throw ValidationError("video '" + anno.video_id + "': negative start_s", line);
    }
    if (!std::isfinite(end) || end < start) {
      throw ValidationError("video '" + anno.video_id + "': end_s precedes start_s", line);
    }
    anno.segments.push_back({TimeInterval(start, end), std::move(vc), std::move(ac)});
  }
  return anno;
}

json annotation_to_json(const VideoAnnotation& anno) {
  json rec = json::object();
  rec["video_id"] = anno.video_id;
  rec["duration_s"] = anno.duration_s;
  if (anno.domain) rec["domain"] = *anno.domain;
  json segs = json::array();
  for (const auto& seg : anno.segments) {
    json s = json::object();
    s["start_s"] = seg.interval.start().seconds();
    s["end_s"] = seg.interval.end().seconds();
    s["video_caption"] = seg.video_caption;
    s["audio_caption"] = seg.audio_caption;
    segs.push_back(std::move(s));
  }
  rec["segments"] = std::move(segs);
  return rec;
}

}  // namespace

AnnotationSet parse_annotations(std::istream& in) {
  AnnotationSet out;
  std::set<std::string> seen;
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
    auto anno = annotation_from_json(rec, line_no);
    validate_annotation(anno, line_no, &out.warnings);
    if (!seen.insert(anno.video_id).second) {
      throw ValidationError("duplicate video_id '" + anno.video_id + "'", line_no);
    }
    out.annotations.push_back(std::move(anno));
  }
  return out;
}

AnnotationSet load_annotations(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open annotations file: " + path.string());
  return parse_annotations(in);
}

std::string serialize_annotation(const VideoAnnotation& anno) {
  return annotation_to_json(anno).dump();
}

void write_annotations(std::ostream& out, std::span<const VideoAnnotation> annos) {
  for (const auto& a : annos) out << serialize_annotation(a) << '\n';
}

std::vector<VideoAnnotation> filter_corpus(std::span<const VideoAnnotation> annos,
                                           const CorpusFilter& filter) {
  std::vector<VideoAnnotation> kept;
  for (const auto& a : annos) {
    const auto n = a.segments.size();
    if (a.duration_s >= filter.min_duration_s && a.duration_s <= filter.max_duration_s &&
        n >= filter.min_segments && n <= filter.max_segments) {
      kept.push_back(a);
    }
  }
  return kept;
}

std::vector<Timestamp> merge_segments(std::span<const Timestamp> boundaries,
                                      std::span<const double> adjacent_similarity,
                                      double threshold, std::size_t max_segments) {
  if (boundaries.size() < 2) throw InvalidArgument("need at least one segment (two boundaries)");
  if (adjacent_similarity.size() != boundaries.size() - 2) {
    throw DimensionMismatch("expected " + std::to_string(boundaries.size() - 2) +
                            " adjacent similarities, got " +
                            std::to_string(adjacent_similarity.size()));
  }
  if (max_segments == 0) throw InvalidArgument("max_segments must be at least 1");
  for (std::size_t i = 1; i < boundaries.size(); ++i) {
    if (!(boundaries[i - 1] < boundaries[i])) {
      throw InvalidArgument("boundaries must be strictly increasing");
    }
  }
  for (double s : adjacent_similarity) {
    if (!(s >= 0.0 && s <= 1.0)) throw InvalidArgument("similarity outside [0, 1]");
  }

  std::vector<Timestamp> bounds(boundaries.begin(), boundaries.end());
  std::vector<double> seams(adjacent_similarity.begin(), adjacent_similarity.end());

  while (!seams.empty()) {
    const auto best = std::max_element(seams.begin(), seams.end());  // first max wins ties
    const std::size_t segments = bounds.size() - 1;
    if (*best < threshold && segments <= max_segments) break;
    const auto j = static_cast<std::size_t>(best - seams.begin());
    bounds.erase(bounds.begin() + static_cast<std::ptrdiff_t>(j + 1));
    seams.erase(best);
  }
  return bounds;
}

AgreementTable::AgreementTable(std::vector<std::vector<int>> counts) : counts_(std::move(counts)) {
  if (counts_.size() < 2) throw InvalidArgument("agreement table needs at least 2 items");
  const std::size_t k = counts_.front().size();
  if (k == 0) throw InvalidArgument("agreement table needs at least 1 category");
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    const auto& row = counts_[i];
    if (row.size() != k) throw InvalidArgument("ragged agreement table");
    int sum = 0;
    for (int c : row) {
      if (c < 0) throw InvalidArgument("negative vote count");
      sum += c;
    }
    if (i == 0) raters_ = sum;
    if (sum != raters_) {
      throw InvalidArgument("item " + std::to_string(i) + " has " + std::to_string(sum) +
                            " votes, expected " + std::to_string(raters_));
    }
  }
  if (raters_ < 2) throw InvalidArgument("agreement table needs at least 2 raters per item");
}

double fleiss_kappa(const AgreementTable& table) {
  const auto& counts = table.counts();
  const long long n = table.raters();
  const long long items = static_cast<long long>(table.items());
  const std::size_t k = table.categories();

  // Integer sums keep the degenerate and unanimous cases exact.
  long long pair_agreements = 0;
  std::vector<long long> column(k, 0);
  for (const auto& row : counts) {
    for (std::size_t j = 0; j < k; ++j) {
      pair_agreements += static_cast<long long>(row[j]) * (row[j] - 1);
      column[j] += row[j];
    }
  }
  const long long total = items * n;
  long long col_sq = 0;
  for (long long c : column) col_sq += c * c;
  if (col_sq == total * total) {
    throw DegenerateAgreement("expected agreement is 1: every vote falls in one category");
  }

  const double p_bar = static_cast<double>(pair_agreements) / static_cast<double>(items * n * (n - 1));
  if (pair_agreements == items * n * (n - 1)) return 1.0;
  const double p_e = static_cast<double>(col_sq) / (static_cast<double>(total) * static_cast<double>(total));
  return (p_bar - p_e) / (1.0 - p_e);
}

}  // namespace avground
