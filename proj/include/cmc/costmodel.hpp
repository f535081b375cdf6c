#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cmc/cost_table.hpp"
#include "cmc/crag.hpp"
#include "cmc/features.hpp"
#include "cmc/forest.hpp"
#include "cmc/image.hpp"

namespace cmc {

/// Ground-truth label of every leaf (by candidate index; 0 for non-leaves
/// and background leaves). A leaf takes the label with the largest pixel
/// overlap, label 0 included, the smaller label winning ties.
std::vector<std::uint32_t> leaf_labels(const Crag& crag, const LabelImage& ground_truth);

/// Feasible assignment closest to the ground truth: for every object, the
/// maximal candidates whose leaves all carry its label are selected, and
/// edges between selected candidates of the same label are merged. The mode
/// restricts the result the same way the solver does (no merges for mt,
/// leaves only for mc). Throws DimensionMismatch.
Solution best_effort(const Crag& crag, const LabelImage& ground_truth, SolveMode mode = SolveMode::Full);

struct SampleSet {
  std::vector<FeatureVector> features;
  std::vector<int> labels;
};

struct TrainingSamples {
  SampleSet nodes;
  SampleSet edges;
};

/// Derives the object of every leaf from the best-effort solution (the
/// merged component of the selected candidate covering it), then labels a
/// candidate positive iff all of its leaves belong to one object, and an
/// edge positive iff both endpoints are positive for the same object.
TrainingSamples label_instances(const Crag& crag, const Solution& best_effort_solution,
                                const FeatureSet& features);

/// Trained node and edge classifiers with the schemas they were fit on.
struct CostModel {
  std::vector<std::string> node_schema;
  std::vector<std::string> edge_schema;
  Forest node_forest;
  Forest edge_forest;

  bool operator==(const CostModel&) const = default;
};

CostModel train_cost_model(const TrainingSamples& samples, const std::vector<std::string>& node_schema,
                           const std::vector<std::string>& edge_schema, const ForestParams& params);

inline constexpr double kProbabilityClamp = 1e-6;

/// log((1 - p) / p) with p clamped to [1e-6, 1 - 1e-6].
double probability_to_cost(double p);

/// Throws SchemaMismatch if the feature schemas differ from the model's.
CostTable predict_costs(const CostModel& model, const Crag& crag, const FeatureSet& features);

}  // namespace cmc
