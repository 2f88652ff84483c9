#include "avground/caption_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "avground/error.hpp"

namespace avground {

namespace {

using NgramCounts = std::map<NgramKey, int>;

NgramCounts count_ngrams(const std::vector<std::string>& tokens, int n) {
  NgramCounts counts;
  const auto len = static_cast<int>(tokens.size());
  for (int i = 0; i + n <= len; ++i) {
    std::string key = tokens[i];
    for (int k = 1; k < n; ++k) {
      key += ' ';
      key += tokens[i + k];
    }
    ++counts[key];
  }
  return counts;
}

std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<std::size_t> row(b.size() + 1, 0);
  for (const auto& x : a) {
    std::size_t diag = 0;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = x == b[j - 1] ? diag + 1 : std::max(row[j], row[j - 1]);
      diag = up;
    }
  }
  return row[b.size()];
}

}  // namespace

std::size_t IdfCorpus::document_frequency(const NgramKey& gram, int n) const {
  if (n < 1 || n > max_ngram_) return 0;
  const auto& table = df_[static_cast<std::size_t>(n - 1)];
  auto it = table.find(gram);
  return it == table.end() ? 0 : it->second;
}

double IdfCorpus::idf(const NgramKey& gram, int n) const {
  const auto df = std::max<std::size_t>(1, document_frequency(gram, n));
  return std::log(static_cast<double>(documents_) / static_cast<double>(df));
}

IdfCorpus build_idf_corpus(std::span<const TokenizedCaption> refs, int max_ngram) {
  if (refs.empty()) throw EmptyCorpus("cannot build an idf corpus from zero references");
  if (max_ngram < 1) throw InvalidArgument("max_ngram must be positive");
  IdfCorpus corpus;
  corpus.documents_ = refs.size();
  corpus.max_ngram_ = max_ngram;
  corpus.df_.resize(static_cast<std::size_t>(max_ngram));
  for (const auto& ref : refs) {
    for (int n = 1; n <= max_ngram; ++n) {
      for (const auto& [gram, count] : count_ngrams(ref.tokens(), n)) {
        ++corpus.df_[static_cast<std::size_t>(n - 1)][gram];
      }
    }
  }
  return corpus;
}

double bleu4(const TokenizedCaption& pred, std::span<const TokenizedCaption> refs,
             const MetricConfig& config) {
  if (refs.empty()) throw InvalidArgument("bleu4 needs at least one reference");
  if (pred.empty()) return 0.0;

  const auto c = static_cast<int>(pred.size());
  const int orders = std::min(config.max_ngram, c);
  double log_sum = 0.0;
  for (int n = 1; n <= orders; ++n) {
    const auto pred_counts = count_ngrams(pred.tokens(), n);
    NgramCounts max_ref;
    for (const auto& ref : refs) {
      for (const auto& [gram, count] : count_ngrams(ref.tokens(), n)) {
        auto& slot = max_ref[gram];
        slot = std::max(slot, count);
      }
    }
    int matched = 0;
    for (const auto& [gram, count] : pred_counts) {
      auto it = max_ref.find(gram);
      if (it != max_ref.end()) matched += std::min(count, it->second);
    }
    const int total = c - n + 1;
    const double precision =
        matched == 0 ? config.bleu_epsilon : static_cast<double>(matched) / total;
    log_sum += std::log(precision);
  }

  // Closest reference length, shorter on ties.
  std::size_t r = refs.front().size();
  for (const auto& ref : refs) {
    const auto d_new = std::abs(static_cast<long>(ref.size()) - c);
    const auto d_old = std::abs(static_cast<long>(r) - c);
    if (d_new < d_old || (d_new == d_old && ref.size() < r)) r = ref.size();
  }
  const double bp = std::exp(std::min(0.0, 1.0 - static_cast<double>(r) / c));
  return std::clamp(bp * std::exp(log_sum / orders), 0.0, 1.0);
}

double rouge_l(const TokenizedCaption& pred, const TokenizedCaption& ref, const MetricConfig& config) {
  if (pred.empty() || ref.empty()) return 0.0;
  const auto lcs = static_cast<double>(lcs_length(pred.tokens(), ref.tokens()));
  if (lcs == 0.0) return 0.0;
  const double recall = lcs / static_cast<double>(ref.size());
  const double precision = lcs / static_cast<double>(pred.size());
  const double b2 = config.rouge_beta * config.rouge_beta;
  return (1.0 + b2) * recall * precision / (recall + b2 * precision);
}

std::size_t MeteorAlignment::chunks() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (i == 0 || pairs[i].first != pairs[i - 1].first + 1 ||
        pairs[i].second != pairs[i - 1].second + 1) {
      ++n;
    }
  }
  return n;
}

namespace {

constexpr auto kNone = std::numeric_limits<std::size_t>::max();

// Greedy stage-wise alignment. Gives the maximum number of matches; used as
// the starting point for the chunk search below.
std::vector<std::size_t> greedy_alignment(const std::vector<std::string>& p, const std::vector<std::string>& r,
                                          const std::vector<std::string>& ps,
                                          const std::vector<std::string>& rs) {
  std::vector<std::size_t> pred_to_ref(p.size(), kNone);
  std::vector<bool> ref_used(r.size(), false);
  auto run_stage = [&](const std::vector<std::string>& pk, const std::vector<std::string>& rk) {
    for (std::size_t i = 0; i < pk.size(); ++i) {
      if (pred_to_ref[i] != kNone) continue;
      std::size_t chosen = kNone;
      if (i > 0 && pred_to_ref[i - 1] != kNone) {
        const std::size_t next = pred_to_ref[i - 1] + 1;
        if (next < rk.size() && !ref_used[next] && rk[next] == pk[i]) chosen = next;
      }
      if (chosen == kNone) {
        for (std::size_t j = 0; j < rk.size(); ++j) {
          if (!ref_used[j] && rk[j] == pk[i]) {
            chosen = j;
            break;
          }
        }
      }
      if (chosen != kNone) {
        pred_to_ref[i] = chosen;
        ref_used[chosen] = true;
      }
    }
  };
  run_stage(p, r);
  run_stage(ps, rs);
  return pred_to_ref;
}

std::size_t links_of(const std::vector<std::size_t>& a) {
  std::size_t links = 0;
  for (std::size_t i = 1; i < a.size(); ++i) {
    if (a[i] != kNone && a[i - 1] != kNone && a[i] == a[i - 1] + 1) ++links;
  }
  return links;
}

// Depth-first search over alignments that keep the stage-wise maximum match
// counts (all exact matches, then all stem matches of the leftovers) and
// maximise the number of adjacent links, i.e. minimise chunks. Bounded by a
// node budget; the incumbent is returned if it runs out.
class ChunkSearch {
 public:
  static constexpr std::size_t kNodeBudget = 200000;

  ChunkSearch(const std::vector<std::string>& p, const std::vector<std::string>& r,
              const std::vector<std::string>& ps, const std::vector<std::string>& rs,
              std::vector<std::size_t> incumbent)
      : p_(p), r_(r), ps_(ps), rs_(rs), best_(std::move(incumbent)) {
    std::map<std::string, std::size_t> cp, cr;
    for (const auto& w : p_) ++cp[w];
    for (const auto& w : r_) ++cr[w];
    for (const auto& [w, c] : cp) {
      auto it = cr.find(w);
      const std::size_t need = it == cr.end() ? 0 : std::min(c, it->second);
      exact_needed_ += need;
      need_[w] = need;
      remaining_[w] = c;
    }
    for (std::size_t i = 0; i < best_.size(); ++i) {
      if (best_[i] == kNone) continue;
      ++matches_;
      if (p_[i] != r_[best_[i]]) ++stem_needed_;
    }
    best_links_ = links_of(best_);
  }

  std::vector<std::size_t> run() {
    // A single chunk (or no match) cannot be improved.
    if (matches_ <= 1 || best_links_ + 1 == matches_) return best_;
    cur_.assign(p_.size(), kNone);
    used_.assign(r_.size(), false);
    visit(0, 0, 0, 0);
    return best_;
  }

 private:
  void visit(std::size_t i, std::size_t exact, std::size_t stem, std::size_t links) {
    if (nodes_++ >= kNodeBudget || best_links_ + 1 == matches_) return;
    const std::size_t matched = exact + stem;
    if (links + (matches_ - matched) <= best_links_) return;
    if (i == p_.size()) {
      if (exact == exact_needed_ && stem == stem_needed_ && links > best_links_) {
        best_links_ = links;
        best_ = cur_;
      }
      return;
    }
    if (matched + (p_.size() - i) < matches_) return;

    const std::string& w = p_[i];
    std::size_t& remaining = remaining_[w];
    std::size_t& need = need_[w];
    const std::size_t prev = i > 0 ? cur_[i - 1] : kNone;
    --remaining;

    auto try_ref = [&](std::size_t j, bool is_exact) {
      used_[j] = true;
      cur_[i] = j;
      const std::size_t link = prev != kNone && j == prev + 1 ? 1 : 0;
      if (is_exact) {
        --need;
        visit(i + 1, exact + 1, stem, links + link);
        ++need;
      } else {
        visit(i + 1, exact, stem + 1, links + link);
      }
      cur_[i] = kNone;
      used_[j] = false;
    };

    // Exact candidates, the chunk-extending one first.
    if (need > 0) {
      if (prev != kNone && prev + 1 < r_.size() && !used_[prev + 1] && r_[prev + 1] == w) try_ref(prev + 1, true);
      for (std::size_t j = 0; j < r_.size(); ++j) {
        if (j == prev + 1 && prev != kNone) continue;
        if (!used_[j] && r_[j] == w) try_ref(j, true);
      }
    }
    // Leaving this token out of the exact stage is only possible when later
    // occurrences can still cover the word's exact quota.
    if (remaining >= need) {
      if (stem < stem_needed_) {
        for (std::size_t j = 0; j < r_.size(); ++j) {
          if (!used_[j] && r_[j] != w && rs_[j] == ps_[i]) try_ref(j, false);
        }
      }
      visit(i + 1, exact, stem, links);
    }
    ++remaining;
  }

  const std::vector<std::string>& p_;
  const std::vector<std::string>& r_;
  const std::vector<std::string>& ps_;
  const std::vector<std::string>& rs_;
  std::vector<std::size_t> best_;
  std::size_t best_links_ = 0;
  std::size_t matches_ = 0;
  std::size_t exact_needed_ = 0;
  std::size_t stem_needed_ = 0;
  std::map<std::string, std::size_t> need_, remaining_;
  std::vector<std::size_t> cur_;
  std::vector<bool> used_;
  std::size_t nodes_ = 0;
};

}  // namespace

MeteorAlignment meteor_align(const TokenizedCaption& pred, const TokenizedCaption& ref) {
  const auto& p = pred.tokens();
  const auto& r = ref.tokens();
  std::vector<std::string> p_stems, r_stems;
  p_stems.reserve(p.size());
  r_stems.reserve(r.size());
  for (const auto& t : p) p_stems.push_back(porter_stem(t));
  for (const auto& t : r) r_stems.push_back(porter_stem(t));

  const auto pred_to_ref = ChunkSearch(p, r, p_stems, r_stems, greedy_alignment(p, r, p_stems, r_stems)).run();

  MeteorAlignment out;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (pred_to_ref[i] != kNone) out.pairs.emplace_back(i, pred_to_ref[i]);
  }
  return out;
}

double meteor(const TokenizedCaption& pred, const TokenizedCaption& ref, const MetricConfig& config) {
  if (pred.empty() || ref.empty()) return 0.0;
  const auto alignment = meteor_align(pred, ref);
  const auto m = static_cast<double>(alignment.matches());
  if (m == 0.0) return 0.0;
  const double precision = m / static_cast<double>(pred.size());
  const double recall = m / static_cast<double>(ref.size());
  const double f_mean = precision * recall /
                        (config.meteor_alpha * precision + (1.0 - config.meteor_alpha) * recall);
  const double frag = static_cast<double>(alignment.chunks()) / m;
  const double penalty = config.meteor_gamma * std::pow(frag, config.meteor_beta);
  return f_mean * (1.0 - penalty);
}

double cider(const TokenizedCaption& pred, std::span<const TokenizedCaption> refs,
             const IdfCorpus& corpus, const MetricConfig& config) {
  if (corpus.documents() == 0) throw EmptyCorpus("idf corpus is empty");
  if (refs.empty()) throw InvalidArgument("cider needs at least one reference");
  const int orders = std::min(config.max_ngram, corpus.max_ngram());

  auto weigh = [&](const NgramCounts& counts, int n) {
    std::map<NgramKey, double> vec;
    for (const auto& [gram, tf] : counts) vec[gram] = tf * corpus.idf(gram, n);
    return vec;
  };
  auto norm = [](const std::map<NgramKey, double>& v) {
    double s = 0.0;
    for (const auto& [g, w] : v) s += w * w;
    return std::sqrt(s);
  };

  double total = 0.0;
  for (int n = 1; n <= orders; ++n) {
    const auto pv = weigh(count_ngrams(pred.tokens(), n), n);
    const double pn = norm(pv);
    double per_ref = 0.0;
    for (const auto& ref : refs) {
      const auto rv = weigh(count_ngrams(ref.tokens(), n), n);
      const double rn = norm(rv);
      if (pn == 0.0 || rn == 0.0) continue;
      double dot = 0.0;
      for (const auto& [gram, w] : pv) {
        auto it = rv.find(gram);
        if (it != rv.end()) dot += w * it->second;
      }
      per_ref += std::clamp(dot / (pn * rn), 0.0, 1.0);
    }
    total += per_ref / static_cast<double>(refs.size());
  }
  return config.cider_scale * total / static_cast<double>(orders);
}

CaptionMetric caption_metric_from_name(std::string_view name) {
  if (name == "bleu4") return CaptionMetric::kBleu4;
  if (name == "rouge_l") return CaptionMetric::kRougeL;
  if (name == "meteor") return CaptionMetric::kMeteor;
  throw UnknownMetric("unknown caption metric '" + std::string(name) + "'");
}

double score_caption(std::string_view pred, std::string_view ref, CaptionMetric metric,
                     const MetricConfig& config) {
  const auto p = tokenize(pred);
  const auto r = tokenize(ref);
  switch (metric) {
    case CaptionMetric::kBleu4:
      return bleu4(p, std::span(&r, 1), config);
    case CaptionMetric::kRougeL:
      return rouge_l(p, r, config);
    case CaptionMetric::kMeteor:
      return meteor(p, r, config);
  }
  return 0.0;
}

double score_caption(std::string_view pred, std::string_view ref, std::string_view metric_name,
                     const MetricConfig& config) {
  return score_caption(pred, ref, caption_metric_from_name(metric_name), config);
}

}  // namespace avground
