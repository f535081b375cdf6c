#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cmc/costmodel.hpp"
#include "cmc/crag.hpp"
#include "cmc/eval.hpp"
#include "cmc/features.hpp"
#include "cmc/serialization.hpp"
#include "cmc/solver.hpp"

namespace cmc {

struct PipelineConfig {
  double seed_threshold = 0.3;
  int max_merges = 5;
  std::optional<double> score_threshold;
  int n_trees = 100;
  std::uint64_t rng_seed = 42;
  SolveMode mode = SolveMode::Full;
  bool ignore_background = true;
  double time_limit = 300.0;

  /// Throws InvalidArgument for out-of-range parameters.
  void validate() const;
  Json to_json() const;
  /// Missing fields keep their defaults; unknown fields are rejected.
  static PipelineConfig from_json(const Json& doc);
  bool operator==(const PipelineConfig&) const = default;
};

struct ImageInputs {
  RealImage raw;
  RealImage boundary;
  std::optional<LabelImage> gt;
  /// Precomputed oversegmentation; watershed on the boundary map otherwise.
  std::optional<LabelImage> superpixels;
};

/// Reads raw/boundary/gt/superpixels PGMs (empty paths are skipped). I/O
/// errors are tagged with the role of the failing file.
ImageInputs load_inputs(const std::string& raw, const std::string& boundary, const std::string& gt = {},
                        const std::string& superpixels = {});

struct PreparedImage {
  LabelImage superpixels;
  Crag crag;
  FeatureSet features;
};

/// Superpixels, merge tree, CRAG and features for one image.
PreparedImage prepare_image(const PipelineConfig& config, const ImageInputs& inputs);

/// Trains node and edge forests on the best-effort labels of every image
/// (each must carry ground truth).
CostModel train_pipeline(const PipelineConfig& config, const std::vector<ImageInputs>& training);

struct Metrics {
  VoiResult voi;
  double rand = 0.0;
  DetectionResult detection;

  Json to_json() const;
};

Metrics evaluate(const LabelImage& pred, const LabelImage& gt, bool ignore_background);

struct PipelineResult {
  PreparedImage prepared;
  CostTable costs;
  SolveResult solve;
  LabelImage segmentation;
  std::optional<Metrics> metrics;
};

/// Runs superpixels -> merge tree -> CRAG -> features -> costs -> solve ->
/// segmentation -> metrics (when ground truth is present). If `persist_dir`
/// is non-empty every intermediate is written there.
PipelineResult run_pipeline(const PipelineConfig& config, const CostModel& model, const ImageInputs& inputs,
                            const std::string& persist_dir = {});

}  // namespace cmc
