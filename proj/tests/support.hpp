#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "cmc/cost_table.hpp"
#include "cmc/crag.hpp"
#include "cmc/image.hpp"

namespace cmc::testing {

/// Merge of two existing nodes into a new id.
struct Merge {
  CandidateId a, b, parent;
};

/// Builds a CRAG from a leaf label grid (0 = excluded) and merges, with
/// adjacency computed by pairwise pixel comparison of every candidate pair.
Crag crag_from_grid(const std::vector<std::vector<int>>& grid, const std::vector<Merge>& merges);

/// Label image from a row-wise grid.
LabelImage label_image(const std::vector<std::vector<int>>& grid);

/// Seven-candidate example:
///   a b d      e = a+b, f = c+d, g = e+f
///   c c d
/// ids a..g = 1..7.
Crag abcd_crag();
enum AbcdId : CandidateId { A = 1, B, C, D, E, F, G };

/// Leaves 1..4 in a row with d = 5 = {1,2}, 6 = {3,4}, root 7. The object
/// {1,2,3} is covered by no single candidate: with `row_costs` the optimum
/// selects 5 and 3 and merges them, which neither restriction can express.
Crag row_crag();
CostTable row_costs(const Crag& crag);

/// Random CRAG with 2..max_leaves connected leaves on a small grid and random
/// merges of depth <= max_depth; regenerated until |V| + |E| <= max_variables.
Crag random_crag(std::mt19937_64& rng, int max_leaves = 5, int max_depth = 3, std::size_t max_variables = 26);

/// Costs k/64 with k uniform in [-64, 64]: exact binary fractions.
CostTable random_dyadic_costs(const Crag& crag, std::mt19937_64& rng);

/// Costs from id / edge-key maps; unspecified entries take `fallback`.
CostTable costs_by_id(const Crag& crag, const std::map<CandidateId, double>& f,
                      const std::map<std::string, double>& g, double fallback);

/// Assignment from selected ids and merged edge keys ("i-j").
Solution assignment(const Crag& crag, const std::vector<CandidateId>& selected,
                    const std::vector<EdgeKey>& merged);

}  // namespace cmc::testing
