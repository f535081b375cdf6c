#pragma once

#include <cstdint>
#include <map>
#include <utility>

#include "cmc/image.hpp"

namespace cmc {

/// Joint pixel counts of (ground-truth label, predicted label).
struct ContingencyTable {
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::size_t> counts;
  std::map<std::uint32_t, std::size_t> gt_totals;
  std::map<std::uint32_t, std::size_t> pred_totals;
  std::size_t total = 0;
};

/// Throws DimensionMismatch. With ignore_background, pixels whose ground
/// truth is 0 are left out.
ContingencyTable contingency(const LabelImage& pred, const LabelImage& gt, bool ignore_background);

struct VoiResult {
  double split = 0.0;  // H(pred | gt)
  double merge = 0.0;  // H(gt | pred)
  double total = 0.0;
};

/// Variation of information in bits. Throws EmptyOverlap if no pixel is evaluated.
VoiResult voi(const LabelImage& pred, const LabelImage& gt, bool ignore_background = false);

/// Fraction of unordered pixel pairs on which both partitions agree.
/// Throws EmptyOverlap, or DegenerateInput for fewer than two pixels.
double rand_index(const LabelImage& pred, const LabelImage& gt, bool ignore_background = false);

struct DetectionResult {
  double precision = 0.0;
  double recall = 0.0;
  double f_score = 0.0;
  std::size_t true_positives = 0;
  std::size_t pred_objects = 0;
  std::size_t gt_objects = 0;
};

inline constexpr double kDetectionIou = 0.5;

/// Greedy one-to-one matching of non-zero objects by descending IoU,
/// accepting pairs with IoU > 0.5.
DetectionResult detection_score(const LabelImage& pred, const LabelImage& gt);

}  // namespace cmc
