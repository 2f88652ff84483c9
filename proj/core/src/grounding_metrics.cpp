#include "avground/grounding_metrics.hpp"

#include <algorithm>
#include <vector>

#include "avground/error.hpp"

namespace avground {

double recall_at_iou(std::span<const GroundingResult> results, double threshold) {
  if (results.empty()) throw EmptyResults("recall over zero results");
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw InvalidArgument("IoU threshold must lie in (0, 1]");
  }
  std::size_t hits = 0;
  for (const auto& r : results) {
    if (r.iou() >= threshold) ++hits;
  }
  return 100.0 * static_cast<double>(hits) / static_cast<double>(results.size());
}

double mean_iou(std::span<const GroundingResult> results) {
  if (results.empty()) throw EmptyResults("mean IoU over zero results");
  std::vector<double> ious;
  ious.reserve(results.size());
  for (const auto& r : results) ious.push_back(r.iou());
  // Sorted summation makes the result independent of input order.
  std::sort(ious.begin(), ious.end());
  double sum = 0.0;
  for (double v : ious) sum += v;
  return 100.0 * sum / static_cast<double>(results.size());
}

}  // namespace avground
