#pragma once

#include <cstddef>
#include <vector>

#include "cmc/cost_table.hpp"
#include "cmc/crag.hpp"
#include "cmc/image.hpp"

namespace cmc {

struct SolveOptions {
  SolveMode mode = SolveMode::Full;
  double time_limit_seconds = 300.0;
};

struct SolveResult {
  Solution solution;
  /// False if the time limit interrupted the search; `solution` is then the
  /// best feasible assignment found so far.
  bool optimal = true;
  /// Number of branch-and-bound solves in the cutting-plane loop.
  int iterations = 0;
  /// Path constraints accumulated over all iterations.
  std::size_t path_constraints = 0;
  /// Search nodes explored over all iterations.
  std::size_t nodes = 0;
  /// Optimum of each relaxed problem, one entry per completed iteration.
  std::vector<double> iteration_objectives;
};

/// Minimizes <y,f> + <m,g> subject to overlap, incidence and path
/// constraints. Path constraints are separated lazily: the relaxed problem
/// is solved exactly by branch-and-bound, violated constraints are added,
/// and the problem is re-solved until the optimum is consistent.
SolveResult solve(const Crag& crag, const CostTable& costs, const SolveOptions& options = {});

/// For every cut edge whose endpoints are connected by merged edges, a
/// shortest merged path (BFS) between them. Empty iff no path constraint is
/// violated.
std::vector<PathConstraint> separate_path_constraints(const Crag& crag, const std::vector<std::uint8_t>& m);

inline constexpr std::size_t kBruteForceLimit = 26;

/// Exhaustive oracle: enumerates assignments in lexicographic order (y then
/// m), keeps those accepted by validate_solution and the mode restriction,
/// and returns the first of minimal objective. Throws TooLarge if
/// |V| + |E| exceeds kBruteForceLimit.
Solution brute_force(const Crag& crag, const CostTable& costs, SolveMode mode = SolveMode::Full);

/// Connected components of selected candidates under merged edges, labeled
/// 1.. in row-major order of each component's first pixel; pixels of
/// unselected candidates are 0. Throws InfeasibleSolution for invalid input.
LabelImage extract_segmentation(const Crag& crag, const Solution& solution);

/// True iff the assignment respects the mode's fixed variables.
bool respects_mode(const Crag& crag, const Solution& solution, SolveMode mode);

}  // namespace cmc
