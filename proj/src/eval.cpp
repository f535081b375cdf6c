#include "cmc/eval.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>
#include <vector>

#include "cmc/error.hpp"

namespace cmc {

ContingencyTable contingency(const LabelImage& pred, const LabelImage& gt, bool ignore_background) {
  if (pred.width() != gt.width() || pred.height() != gt.height()) {
    throw Error(ErrorCode::DimensionMismatch, "prediction and ground truth differ in size");
  }
  ContingencyTable table;
  for (std::size_t k = 0; k < gt.size(); ++k) {
    const auto g = gt.data()[k];
    if (ignore_background && g == 0) continue;
    const auto p = pred.data()[k];
    ++table.counts[{g, p}];
    ++table.gt_totals[g];
    ++table.pred_totals[p];
    ++table.total;
  }
  return table;
}

VoiResult voi(const LabelImage& pred, const LabelImage& gt, bool ignore_background) {
  const auto table = contingency(pred, gt, ignore_background);
  if (table.total == 0) throw Error(ErrorCode::EmptyOverlap, "no pixels to evaluate");
  const double n = static_cast<double>(table.total);
  // H(pred|gt) = -sum p_ij log(p_ij / p_gt_i); H(gt|pred) likewise. Terms are
  // summed in sorted order so that swapping the inputs swaps the results exactly.
  std::vector<double> split_terms, merge_terms;
  for (const auto& [key, count] : table.counts) {
    const double pij = static_cast<double>(count) / n;
    const double pg = static_cast<double>(table.gt_totals.at(key.first)) / n;
    const double pp = static_cast<double>(table.pred_totals.at(key.second)) / n;
    split_terms.push_back(-pij * std::log2(pij / pg));
    merge_terms.push_back(-pij * std::log2(pij / pp));
  }
  auto sorted_sum = [](std::vector<double>& terms) {
    std::sort(terms.begin(), terms.end());
    double total = 0.0;
    for (double t : terms) total += t;
    return total;
  };
  double split = sorted_sum(split_terms);
  double merge = sorted_sum(merge_terms);
  split = std::max(0.0, split);
  merge = std::max(0.0, merge);
  return {split, merge, split + merge};
}

double rand_index(const LabelImage& pred, const LabelImage& gt, bool ignore_background) {
  const auto table = contingency(pred, gt, ignore_background);
  if (table.total == 0) throw Error(ErrorCode::EmptyOverlap, "no pixels to evaluate");
  if (table.total < 2) throw Error(ErrorCode::DegenerateInput, "need at least two pixels");
  auto pairs = [](std::size_t k) { return static_cast<double>(k) * static_cast<double>(k - 1) / 2.0; };
  double joint = 0.0, gt_pairs = 0.0, pred_pairs = 0.0;
  for (const auto& [key, count] : table.counts) joint += pairs(count);
  for (const auto& [label, count] : table.gt_totals) gt_pairs += pairs(count);
  for (const auto& [label, count] : table.pred_totals) pred_pairs += pairs(count);
  const double all = pairs(table.total);
  return (all + 2.0 * joint - gt_pairs - pred_pairs) / all;
}

DetectionResult detection_score(const LabelImage& pred, const LabelImage& gt) {
  const auto table = contingency(pred, gt, false);
  DetectionResult result;
  for (const auto& [label, count] : table.gt_totals) result.gt_objects += label != 0;
  for (const auto& [label, count] : table.pred_totals) result.pred_objects += label != 0;

  std::vector<std::tuple<double, std::uint32_t, std::uint32_t>> pairs;
  for (const auto& [key, count] : table.counts) {
    const auto [g, p] = key;
    if (g == 0 || p == 0) continue;
    const double uni = static_cast<double>(table.gt_totals.at(g) + table.pred_totals.at(p) - count);
    const double iou = static_cast<double>(count) / uni;
    if (iou > kDetectionIou) pairs.emplace_back(iou, g, p);
  }
  std::sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) {
    if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) > std::get<0>(b);
    return std::tie(std::get<1>(a), std::get<2>(a)) < std::tie(std::get<1>(b), std::get<2>(b));
  });
  std::set<std::uint32_t> used_gt, used_pred;
  for (const auto& [iou, g, p] : pairs) {
    if (used_gt.count(g) || used_pred.count(p)) continue;
    used_gt.insert(g);
    used_pred.insert(p);
    ++result.true_positives;
  }
  const double tp = static_cast<double>(result.true_positives);
  const bool vacuous = result.gt_objects == 0 && result.pred_objects == 0;
  auto ratio = [&](std::size_t denominator) {
    if (denominator == 0) return vacuous ? 1.0 : 0.0;
    return tp / static_cast<double>(denominator);
  };
  result.precision = ratio(result.pred_objects);
  result.recall = ratio(result.gt_objects);
  const double sum = result.precision + result.recall;
  result.f_score = sum > 0 ? 2.0 * result.precision * result.recall / sum : 0.0;
  return result;
}

}  // namespace cmc
