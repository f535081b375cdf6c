#pragma once

#include <cstdint>
#include <vector>

#include "cmc/features.hpp"

namespace cmc {

/// Binary decision tree node; a leaf when `feature` is -1. Samples with
/// x[feature] <= threshold go left.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  /// Fraction of positive training samples that reached a leaf.
  double probability = 0.0;

  bool operator==(const TreeNode&) const = default;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  double predict(const FeatureVector& x) const;
  bool operator==(const DecisionTree&) const = default;
};

struct ForestParams {
  int n_trees = 100;
  std::uint64_t seed = 42;
  int min_leaf = 1;
};

/// Random forest for binary classification.
struct Forest {
  std::vector<DecisionTree> trees;
  std::size_t n_features = 0;
  std::uint64_t seed = 0;

  /// Mean of the trees' leaf probabilities for the positive class.
  double predict_proba(const FeatureVector& x) const;
  bool operator==(const Forest&) const = default;
};

/// Grows `n_trees` Gini trees, each on a class-balanced bootstrap (both
/// classes drawn with replacement to the majority count), considering
/// floor(sqrt(n_features)) random features per split and growing to purity.
/// Tree t draws from an RNG seeded with seed + t. Throws SingleClass if the
/// labels are not both present, SchemaMismatch for ragged rows.
Forest train_forest(const std::vector<FeatureVector>& samples, const std::vector<int>& labels,
                    const ForestParams& params = {});

}  // namespace cmc
