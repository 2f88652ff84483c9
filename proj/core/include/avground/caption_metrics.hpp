#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace avground {

// Lowercase word tokens produced by tokenize(). Never contains empty tokens.
class TokenizedCaption {
 public:
  TokenizedCaption() = default;
  // Throws InvalidArgument if any token is empty.
  explicit TokenizedCaption(std::vector<std::string> tokens);

  const std::vector<std::string>& tokens() const { return tokens_; }
  std::size_t size() const { return tokens_.size(); }
  bool empty() const { return tokens_.empty(); }

  friend bool operator==(const TokenizedCaption&, const TokenizedCaption&) = default;

 private:
  std::vector<std::string> tokens_;
};

// ASCII lowercase, ASCII punctuation replaced by spaces, split on whitespace.
// The single tokenizer shared by evaluation and rewards.
TokenizedCaption tokenize(std::string_view text);

// Porter (1980) suffix-stripping stemmer over lowercase ASCII words. Words of
// length <= 2 and words containing non-letters are returned unchanged.
std::string porter_stem(std::string_view word);

struct MetricConfig {
  int max_ngram = 4;
  double bleu_epsilon = 1e-9;
  double rouge_beta = 1.2;
  double meteor_alpha = 0.9;  // F_mean = P*R / (alpha*P + (1-alpha)*R) = 10PR/(R+9P)
  double meteor_gamma = 0.5;
  double meteor_beta = 3.0;
  double cider_scale = 10.0;
};

inline constexpr MetricConfig kDefaultMetricConfig{};

using NgramKey = std::string;  // tokens joined by a single space

// Document frequencies of n-grams (n = 1..max_ngram) over a reference set.
class IdfCorpus {
 public:
  std::size_t documents() const { return documents_; }
  int max_ngram() const { return max_ngram_; }
  // 0 for n-grams never seen.
  std::size_t document_frequency(const NgramKey& gram, int n) const;
  // log(N / df); unseen n-grams use df = 1.
  double idf(const NgramKey& gram, int n) const;

 private:
  friend IdfCorpus build_idf_corpus(std::span<const TokenizedCaption>, int);
  std::size_t documents_ = 0;
  int max_ngram_ = 4;
  std::vector<std::map<NgramKey, std::size_t>> df_;  // index n-1
};

// Throws EmptyCorpus for an empty reference list.
IdfCorpus build_idf_corpus(std::span<const TokenizedCaption> refs, int max_ngram = 4);

// Sentence BLEU-4 with clipped counts against all references and brevity
// penalty exp(min(0, 1 - r/c)), r the closest reference length (shorter on
// ties). Orders longer than the prediction are left out of the geometric
// mean; a zero precision is floored at bleu_epsilon. Empty prediction scores
// 0. Throws InvalidArgument for an empty reference list.
double bleu4(const TokenizedCaption& pred, std::span<const TokenizedCaption> refs,
             const MetricConfig& config = kDefaultMetricConfig);

// LCS F-measure, F = (1 + b^2) R P / (R + b^2 P).
double rouge_l(const TokenizedCaption& pred, const TokenizedCaption& ref,
               const MetricConfig& config = kDefaultMetricConfig);

// Alignment found by meteor(): pred index -> ref index, in pred order.
struct MeteorAlignment {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::size_t matches() const { return pairs.size(); }
  std::size_t chunks() const;
};

// Two-stage unigram alignment: every possible exact surface match, then
// every possible Porter-stem match among the leftovers. Among alignments with
// that many matches, the one with the fewest chunks is chosen (searched from
// a greedy start under a node budget).
MeteorAlignment meteor_align(const TokenizedCaption& pred, const TokenizedCaption& ref);

// F_mean * (1 - gamma * (chunks / m)^beta); 0 when nothing aligns.
double meteor(const TokenizedCaption& pred, const TokenizedCaption& ref,
              const MetricConfig& config = kDefaultMetricConfig);

// Mean over n of scale * cosine(tf-idf(pred), tf-idf(ref)), averaged over
// references. Zero vectors contribute 0.
double cider(const TokenizedCaption& pred, std::span<const TokenizedCaption> refs,
             const IdfCorpus& corpus, const MetricConfig& config = kDefaultMetricConfig);

enum class CaptionMetric { kBleu4, kRougeL, kMeteor };

// "bleu4" | "rouge_l" | "meteor". Throws UnknownMetric.
CaptionMetric caption_metric_from_name(std::string_view name);

// Tokenizes both strings and scores with one metric.
double score_caption(std::string_view pred, std::string_view ref, CaptionMetric metric,
                     const MetricConfig& config = kDefaultMetricConfig);
double score_caption(std::string_view pred, std::string_view ref, std::string_view metric_name,
                     const MetricConfig& config = kDefaultMetricConfig);

}  // namespace avground
