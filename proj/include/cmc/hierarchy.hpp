#pragma once

#include <optional>
#include <vector>

#include "cmc/crag.hpp"
#include "cmc/image.hpp"

namespace cmc {

/// Per-pixel boundary evidence in [0,1], 1 = strong boundary.
using BoundaryMap = RealImage;

/// Seeds are the 4-connected components of {boundary < seed_threshold},
/// labeled 1..K in raster order of their first pixel. Remaining pixels are
/// flooded in ascending boundary order (FIFO among equal values); a flooded
/// pixel takes the label of its lowest-valued labeled neighbor, the larger
/// label winning ties. Throws NoSeeds if no pixel is below the threshold.
LabelImage seeded_watershed(const BoundaryMap& boundary, double seed_threshold);

/// Median with the mean-of-central-pair convention for even counts.
double median(std::vector<double> values);

/// Interface intensities between two disjoint regions: for every 4-neighbor
/// pair (p in a, q in b), max(boundary[p], boundary[q]).
std::vector<double> interface_intensities(const std::vector<Pixel>& a, const std::vector<Pixel>& b,
                                          const BoundaryMap& boundary);

/// min(|a|,|b|) * median(interface intensities).
double merge_score(std::size_t size_a, std::size_t size_b, std::vector<double> interface);
/// Region form; throws NotAdjacent if the regions share no 4-neighbor pair.
double merge_score(const std::vector<Pixel>& a, const std::vector<Pixel>& b, const BoundaryMap& boundary);

struct MergeEvent {
  CandidateId child_a = 0;
  CandidateId child_b = 0;
  CandidateId new_id = 0;
  double score = 0.0;

  bool operator==(const MergeEvent&) const = default;
};

/// Greedy region-merging hierarchy over an initial superpixel image.
/// Superpixel labels are the leaf ids; label 0 marks excluded pixels.
struct MergeTree {
  LabelImage superpixels;
  std::vector<MergeEvent> events;
};

/// Repeatedly merges the adjacent pair with minimal score (ties: smallest
/// (min_id, max_id)); new ids continue above the largest superpixel label.
MergeTree build_merge_tree(const LabelImage& superpixels, const BoundaryMap& boundary);

/// Level of every node in the tree: 0 for superpixels, 1 + max(child levels)
/// for merged nodes. Indexed by id via the returned pairs (id, level).
std::vector<std::pair<CandidateId, int>> node_levels(const MergeTree& tree);

/// Builds the CRAG from all nodes of level <= max_merges (and, if given,
/// whose merge score and all descendant merge scores are <= score_threshold).
/// Adjacency edges join every pair of included, disjoint, 4-touching candidates.
Crag extract_candidates(const MergeTree& tree, int max_merges,
                        std::optional<double> score_threshold = std::nullopt);

}  // namespace cmc
