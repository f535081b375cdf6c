#pragma once

#include <cstdint>
#include <vector>

#include "cmc/crag.hpp"

namespace cmc {

/// Selection cost per candidate (f) and merge cost per adjacency edge (g),
/// aligned with the CRAG's candidate and edge indices.
struct CostTable {
  std::vector<double> f;
  std::vector<double> g;

  bool operator==(const CostTable&) const = default;
};

/// Checks that the table has one finite entry per candidate and per edge.
void check_costs(const Crag& crag, const CostTable& costs);

/// <y,f> + <m,g>, summed over candidates then edges in index order. Every
/// objective reported by this library is computed here so that equal
/// assignments compare bit-exactly.
double objective(const CostTable& costs, const std::vector<std::uint8_t>& y,
                 const std::vector<std::uint8_t>& m);

inline double objective(const CostTable& costs, const Solution& solution) {
  return objective(costs, solution.y, solution.m);
}

}  // namespace cmc
