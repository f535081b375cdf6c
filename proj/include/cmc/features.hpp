#pragma once

#include <string>
#include <vector>

#include "cmc/crag.hpp"
#include "cmc/hierarchy.hpp"
#include "cmc/image.hpp"

namespace cmc {

using FeatureVector = std::vector<double>;

inline constexpr int kAngleBins = 16;
inline constexpr int kIntensityBins = 20;
inline constexpr double kQuantiles[] = {0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95};

/// Names of the node features, in output order.
const std::vector<std::string>& node_feature_schema();
/// Names of the edge features, in output order.
const std::vector<std::string>& edge_feature_schema();

/// Shape and intensity features of one region. `raw` and `boundary` must be
/// scaled to [0,1]. Throws EmptyRegion for an empty pixel set.
FeatureVector node_features(const std::vector<Pixel>& pixels, const RealImage& raw,
                            const BoundaryMap& boundary);

/// Contact statistics of an adjacency edge followed by pairwise combinations
/// of the endpoint feature vectors. Throws NotAnEdge for an out-of-range edge.
FeatureVector edge_features(int edge, const Crag& crag, const BoundaryMap& boundary,
                            const FeatureVector& u_features, const FeatureVector& v_features);

/// Boundary-map values across the interface of an edge (see interface_intensities).
std::vector<double> edge_interface(int edge, const Crag& crag, const BoundaryMap& boundary);

struct FeatureSet {
  std::vector<std::string> node_schema;
  std::vector<std::string> edge_schema;
  std::vector<FeatureVector> nodes;  // by candidate index
  std::vector<FeatureVector> edges;  // by edge index

  bool operator==(const FeatureSet&) const = default;
};

FeatureSet compute_features(const Crag& crag, const RealImage& raw, const BoundaryMap& boundary);

namespace detail {

struct Moments {
  double sum = 0, mean = 0, variance = 0, skewness = 0, kurtosis = 0;
};
/// Population moments; skewness and (excess) kurtosis are 0 for zero variance.
Moments moments(const std::vector<double>& values);
/// Linear interpolation between order statistics.
double quantile(const std::vector<double>& sorted, double q);
/// Unnormalized counts over [0,1], right-open bins, last bin closed.
std::vector<double> histogram(const std::vector<double>& values, int bins);
/// Moore-neighbor trace of the outer contour, starting at the first pixel in
/// raster order. Empty for single-pixel or multi-component regions.
std::vector<Pixel> trace_contour(const std::vector<Pixel>& pixels);

}  // namespace detail

}  // namespace cmc
