#include "cmc/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "cmc/error.hpp"

namespace cmc {

double DecisionTree::predict(const FeatureVector& x) const {
  int node = 0;
  while (nodes[node].feature != -1) {
    const auto& n = nodes[node];
    node = x[n.feature] <= n.threshold ? n.left : n.right;
  }
  return nodes[node].probability;
}

double Forest::predict_proba(const FeatureVector& x) const {
  if (x.size() != n_features) throw Error(ErrorCode::SchemaMismatch, "feature vector length differs from forest");
  double sum = 0.0;
  for (const auto& tree : trees) sum += tree.predict(x);
  return trees.empty() ? 0.5 : sum / static_cast<double>(trees.size());
}

namespace {

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double impurity = 0.0;  // sum over children of pos * neg / n
};

class TreeGrower {
 public:
  TreeGrower(const std::vector<double>& matrix, std::size_t n_features, const std::vector<int>& labels,
             int min_leaf, std::mt19937_64& rng)
      : matrix_(matrix), n_features_(n_features), labels_(labels), min_leaf_(min_leaf), rng_(rng) {
    features_.resize(n_features);
    std::iota(features_.begin(), features_.end(), 0);
    try_features_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(n_features))));
  }

  DecisionTree grow(std::vector<int> rows) {
    rows_ = std::move(rows);
    DecisionTree tree;
    struct Task {
      int node;
      std::size_t begin, end;
    };
    tree.nodes.emplace_back();
    std::vector<Task> stack{{0, 0, rows_.size()}};
    while (!stack.empty()) {
      const Task task = stack.back();
      stack.pop_back();
      const std::size_t n = task.end - task.begin;
      std::size_t positives = 0;
      for (std::size_t k = task.begin; k < task.end; ++k) positives += labels_[rows_[k]];
      tree.nodes[task.node].probability = static_cast<double>(positives) / static_cast<double>(n);
      if (positives == 0 || positives == n || n < 2 * static_cast<std::size_t>(min_leaf_)) continue;

      const Split split = best_split(task.begin, task.end, positives);
      if (split.feature == -1) continue;

      const auto middle = std::partition(rows_.begin() + task.begin, rows_.begin() + task.end, [&](int row) {
        return value(row, split.feature) <= split.threshold;
      });
      const std::size_t mid = static_cast<std::size_t>(middle - rows_.begin());
      const int left = static_cast<int>(tree.nodes.size());
      tree.nodes.emplace_back();
      const int right = static_cast<int>(tree.nodes.size());
      tree.nodes.emplace_back();
      auto& node = tree.nodes[task.node];
      node.feature = split.feature;
      node.threshold = split.threshold;
      node.left = left;
      node.right = right;
      stack.push_back({right, mid, task.end});
      stack.push_back({left, task.begin, mid});
    }
    return tree;
  }

 private:
  double value(int row, int feature) const { return matrix_[static_cast<std::size_t>(row) * n_features_ + feature]; }

  // Examines try_features_ random features; if none admits a split, keeps
  // drawing from the remaining ones.
  Split best_split(std::size_t begin, std::size_t end, std::size_t positives) {
    Split best;
    const std::size_t n = end - begin;
    for (std::size_t drawn = 0; drawn < n_features_; ++drawn) {
      if (drawn >= try_features_ && best.feature != -1) break;
      std::uniform_int_distribution<std::size_t> pick(drawn, n_features_ - 1);
      std::swap(features_[drawn], features_[pick(rng_)]);
      const int f = features_[drawn];

      column_.clear();
      for (std::size_t k = begin; k < end; ++k) column_.push_back({value(rows_[k], f), labels_[rows_[k]]});
      std::sort(column_.begin(), column_.end());
      if (column_.front().first == column_.back().first) continue;

      std::size_t left_pos = 0;
      for (std::size_t k = 0; k + 1 < n; ++k) {
        left_pos += column_[k].second;
        if (column_[k].first == column_[k + 1].first) continue;
        const std::size_t left_n = k + 1, right_n = n - left_n;
        if (left_n < static_cast<std::size_t>(min_leaf_) || right_n < static_cast<std::size_t>(min_leaf_)) continue;
        const double lp = static_cast<double>(left_pos), rp = static_cast<double>(positives - left_pos);
        const double impurity = lp * (static_cast<double>(left_n) - lp) / static_cast<double>(left_n) +
                                rp * (static_cast<double>(right_n) - rp) / static_cast<double>(right_n);
        if (best.feature == -1 || impurity < best.impurity) {
          double threshold = 0.5 * (column_[k].first + column_[k + 1].first);
          if (threshold >= column_[k + 1].first) threshold = column_[k].first;
          best = {f, threshold, impurity};
        }
      }
    }
    return best;
  }

  const std::vector<double>& matrix_;
  std::size_t n_features_;
  const std::vector<int>& labels_;
  int min_leaf_;
  std::mt19937_64& rng_;
  std::vector<int> rows_;
  std::vector<int> features_;
  std::size_t try_features_ = 1;
  std::vector<std::pair<double, int>> column_;
};

}  // namespace

Forest train_forest(const std::vector<FeatureVector>& samples, const std::vector<int>& labels,
                    const ForestParams& params) {
  if (samples.size() != labels.size()) throw Error(ErrorCode::InvalidArgument, "sample and label counts differ");
  if (params.n_trees < 1 || params.min_leaf < 1) {
    throw Error(ErrorCode::InvalidArgument, "n_trees and min_leaf must be positive");
  }
  std::vector<int> positive, negative;
  for (int k = 0; k < static_cast<int>(labels.size()); ++k) {
    if (labels[k] != 0 && labels[k] != 1) throw Error(ErrorCode::InvalidArgument, "labels must be 0 or 1");
    (labels[k] ? positive : negative).push_back(k);
  }
  if (positive.empty() || negative.empty()) {
    throw Error(ErrorCode::SingleClass, "training data contains a single class");
  }
  const std::size_t d = samples.front().size();
  std::vector<double> matrix;
  matrix.reserve(samples.size() * d);
  for (const auto& row : samples) {
    if (row.size() != d) throw Error(ErrorCode::SchemaMismatch, "ragged feature rows");
    matrix.insert(matrix.end(), row.begin(), row.end());
  }

  Forest forest;
  forest.n_features = d;
  forest.seed = params.seed;
  const std::size_t per_class = std::max(positive.size(), negative.size());
  for (int t = 0; t < params.n_trees; ++t) {
    std::mt19937_64 rng(params.seed + static_cast<std::uint64_t>(t));
    std::vector<int> rows;
    rows.reserve(2 * per_class);
    for (const auto* pool : {&negative, &positive}) {
      std::uniform_int_distribution<std::size_t> pick(0, pool->size() - 1);
      for (std::size_t k = 0; k < per_class; ++k) rows.push_back((*pool)[pick(rng)]);
    }
    TreeGrower grower(matrix, d, labels, params.min_leaf, rng);
    forest.trees.push_back(grower.grow(std::move(rows)));
  }
  return forest;
}

}  // namespace cmc
