#include "cmc/costmodel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "cmc/error.hpp"

namespace cmc {

namespace {

constexpr std::uint32_t kMixed = 0xffffffffu;

// Common label of all leaves under each candidate, kMixed if they disagree.
std::vector<std::uint32_t> candidate_labels(const Crag& crag, const std::vector<std::uint32_t>& leaf_label) {
  std::vector<std::uint32_t> out(crag.num_candidates(), 0);
  for (int i = 0; i < static_cast<int>(crag.num_candidates()); ++i) {
    const auto& leaves = crag.leaves_under(i);
    std::uint32_t label = leaf_label[leaves.front()];
    for (int leaf : leaves) {
      if (leaf_label[leaf] != label) {
        label = kMixed;
        break;
      }
    }
    out[i] = label;
  }
  return out;
}

}  // namespace

std::vector<std::uint32_t> leaf_labels(const Crag& crag, const LabelImage& ground_truth) {
  if (ground_truth.width() != crag.width() || ground_truth.height() != crag.height()) {
    throw Error(ErrorCode::DimensionMismatch, "ground truth dimensions differ from CRAG");
  }
  std::vector<std::map<std::uint32_t, std::size_t>> overlap(crag.num_candidates());
  const auto& leaf_map = crag.leaf_map();
  for (int r = 0; r < crag.height(); ++r) {
    for (int c = 0; c < crag.width(); ++c) {
      if (leaf_map(r, c) != -1) ++overlap[leaf_map(r, c)][ground_truth(r, c)];
    }
  }
  std::vector<std::uint32_t> labels(crag.num_candidates(), 0);
  for (int i = 0; i < static_cast<int>(crag.num_candidates()); ++i) {
    std::size_t best = 0;
    for (const auto& [label, count] : overlap[i]) {  // ascending label: strict > keeps the smaller on ties
      if (count > best) {
        best = count;
        labels[i] = label;
      }
    }
  }
  return labels;
}

Solution best_effort(const Crag& crag, const LabelImage& ground_truth, SolveMode mode) {
  const auto per_leaf = leaf_labels(crag, ground_truth);
  const auto labels = candidate_labels(crag, per_leaf);
  const int n = static_cast<int>(crag.num_candidates());
  Solution solution = Solution::zeros(crag);

  auto eligible = [&](int i) {
    if (mode == SolveMode::LeafMulticutOnly && !crag.is_leaf(i)) return false;
    return labels[i] != 0 && labels[i] != kMixed;
  };
  for (int i = 0; i < n; ++i) {
    if (!eligible(i)) continue;
    const auto& chain = crag.chain(i);
    const bool has_eligible_ancestor = std::any_of(chain.begin() + 1, chain.end(), eligible);
    if (!has_eligible_ancestor) solution.y[i] = 1;
  }
  if (mode != SolveMode::MergeTreeOnly) {
    for (int e = 0; e < static_cast<int>(crag.num_edges()); ++e) {
      const auto [a, b] = crag.endpoints(e);
      if (solution.y[a] && solution.y[b] && labels[a] == labels[b]) solution.m[e] = 1;
    }
  }
  return solution;
}

TrainingSamples label_instances(const Crag& crag, const Solution& best_effort_solution,
                                const FeatureSet& features) {
  if (best_effort_solution.y.size() != crag.num_candidates() ||
      best_effort_solution.m.size() != crag.num_edges()) {
    throw Error(ErrorCode::KeyMismatch, "solution size does not match CRAG");
  }
  if (features.nodes.size() != crag.num_candidates() || features.edges.size() != crag.num_edges()) {
    throw Error(ErrorCode::KeyMismatch, "feature set does not match CRAG");
  }
  const int n = static_cast<int>(crag.num_candidates());
  std::vector<int> component(n);
  std::iota(component.begin(), component.end(), 0);
  auto find = [&](int x) {
    while (component[x] != x) x = component[x] = component[component[x]];
    return x;
  };
  for (int e = 0; e < static_cast<int>(crag.num_edges()); ++e) {
    if (best_effort_solution.m[e]) component[find(crag.endpoints(e).first)] = find(crag.endpoints(e).second);
  }
  // object id = 1 + component root of the covering selected candidate
  std::vector<std::uint32_t> object(n, 0);
  for (int leaf : crag.leaves()) {
    for (int k : crag.chain(leaf)) {
      if (best_effort_solution.y[k]) {
        object[leaf] = static_cast<std::uint32_t>(find(k)) + 1;
        break;
      }
    }
  }
  const auto labels = candidate_labels(crag, object);
  auto positive = [&](int i) { return labels[i] != 0 && labels[i] != kMixed; };

  TrainingSamples samples;
  for (int i = 0; i < n; ++i) {
    samples.nodes.features.push_back(features.nodes[i]);
    samples.nodes.labels.push_back(positive(i) ? 1 : 0);
  }
  for (int e = 0; e < static_cast<int>(crag.num_edges()); ++e) {
    const auto [a, b] = crag.endpoints(e);
    samples.edges.features.push_back(features.edges[e]);
    samples.edges.labels.push_back(positive(a) && positive(b) && labels[a] == labels[b] ? 1 : 0);
  }
  return samples;
}

CostModel train_cost_model(const TrainingSamples& samples, const std::vector<std::string>& node_schema,
                           const std::vector<std::string>& edge_schema, const ForestParams& params) {
  CostModel model{node_schema, edge_schema, {}, {}};
  model.node_forest = train_forest(samples.nodes.features, samples.nodes.labels, params);
  ForestParams edge_params = params;
  edge_params.seed = params.seed + 0x9e3779b97f4a7c15ull;  // distinct stream for the edge forest
  model.edge_forest = train_forest(samples.edges.features, samples.edges.labels, edge_params);
  return model;
}

double probability_to_cost(double p) {
  const double clamped = std::clamp(p, kProbabilityClamp, 1.0 - kProbabilityClamp);
  return std::log((1.0 - clamped) / clamped);
}

CostTable predict_costs(const CostModel& model, const Crag& crag, const FeatureSet& features) {
  if (features.node_schema != model.node_schema || features.edge_schema != model.edge_schema) {
    throw Error(ErrorCode::SchemaMismatch, "feature schema differs from the trained model");
  }
  if (features.nodes.size() != crag.num_candidates() || features.edges.size() != crag.num_edges()) {
    throw Error(ErrorCode::KeyMismatch, "feature set does not match CRAG");
  }
  CostTable costs;
  for (const auto& x : features.nodes) costs.f.push_back(probability_to_cost(model.node_forest.predict_proba(x)));
  for (const auto& x : features.edges) costs.g.push_back(probability_to_cost(model.edge_forest.predict_proba(x)));
  return costs;
}

}  // namespace cmc
