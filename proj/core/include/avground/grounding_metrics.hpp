#pragma once

#include <optional>
#include <span>
#include <string>

#include "avground/timeline.hpp"

namespace avground {

// One moment-retrieval query. An absent `pred` marks a prediction that did
// not parse (or was missing) and always scores IoU 0.
struct GroundingResult {
  std::string qa_id;
  std::optional<ParsedInterval> pred;
  TimeInterval gt;

  double iou() const { return pred ? avground::iou(*pred, gt) : 0.0; }
};

// Recall@1 as a percentage: 100 * |{r : iou >= threshold}| / |results|.
// Throws EmptyResults, or InvalidArgument for a threshold outside (0, 1].
double recall_at_iou(std::span<const GroundingResult> results, double threshold);

// 100 * mean IoU. Throws EmptyResults.
double mean_iou(std::span<const GroundingResult> results);

}  // namespace avground
