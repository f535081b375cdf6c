#include <doctest.h>

#include <random>
#include <set>

#include "cmc/error.hpp"
#include "cmc/solver.hpp"
#include "support.hpp"

using namespace cmc;
using namespace cmc::testing;

namespace {

CostTable two_object_costs(const Crag& crag) {
  return costs_by_id(crag, {{E, -1.0}, {C, -1.0}, {D, -1.0}}, {{"3-5", -1.0}}, 1.0);
}

}  // namespace

TEST_CASE("all positive costs give the empty selection") {
  const Crag crag = abcd_crag();
  const CostTable costs = costs_by_id(crag, {}, {}, 0.5);
  const auto result = solve(crag, costs);
  CHECK(result.optimal);
  CHECK(result.solution == Solution::zeros(crag));
  CHECK(result.solution.objective == 0.0);
}

TEST_CASE("two-object costs select e, c, d and merge (e,c)") {
  const Crag crag = abcd_crag();
  const CostTable costs = two_object_costs(crag);
  const auto result = solve(crag, costs);
  CHECK(result.optimal);
  CHECK(result.solution.objective == -4.0);
  CHECK(result.solution == [&] {
    Solution s = assignment(crag, {E, C, D}, {EdgeKey::of(E, C)});
    s.objective = -4.0;
    return s;
  }());
  CHECK(brute_force(crag, costs).objective == -4.0);
}

TEST_CASE("merging across subtrees beats both restrictions") {
  const Crag crag = row_crag();
  const CostTable costs = row_costs(crag);
  const auto full = solve(crag, costs, {SolveMode::Full});
  const auto mt = solve(crag, costs, {SolveMode::MergeTreeOnly});
  const auto mc = solve(crag, costs, {SolveMode::LeafMulticutOnly});
  CHECK(full.solution.objective == -3.0);
  CHECK(mt.solution.objective == -2.0);
  CHECK(mc.solution.objective == -1.0);
  CHECK(full.solution.m[crag.find_edge(EdgeKey::of(3, 5)).value()] == 1);
  CHECK(brute_force(crag, costs, SolveMode::MergeTreeOnly).objective == -2.0);
  CHECK(brute_force(crag, costs, SolveMode::LeafMulticutOnly).objective == -1.0);
}

TEST_CASE("path constraint separation") {
  SUBCASE("triangle with two merged edges") {
    const Crag crag = crag_from_grid({{1, 2}, {3, 3}}, {});
    REQUIRE(crag.num_edges() == 3);
    auto s = assignment(crag, {1, 2, 3}, {EdgeKey::of(1, 2), EdgeKey::of(2, 3)});
    const auto cuts = separate_path_constraints(crag, s.m);
    REQUIRE(cuts.size() == 1);
    CHECK(crag.edges()[cuts[0].bypassed_edge] == EdgeKey::of(1, 3));
    REQUIRE(cuts[0].path.size() == 2);
    CHECK(crag.edges()[cuts[0].path[0]] == EdgeKey::of(1, 2));
    CHECK(crag.edges()[cuts[0].path[1]] == EdgeKey::of(2, 3));
  }
  SUBCASE("four-cycle with three merged edges") {
    const Crag crag = crag_from_grid({{1, 2}, {4, 3}}, {});
    REQUIRE(crag.num_edges() == 4);
    auto s = assignment(crag, {1, 2, 3, 4}, {EdgeKey::of(1, 2), EdgeKey::of(2, 3), EdgeKey::of(3, 4)});
    const auto cuts = separate_path_constraints(crag, s.m);
    REQUIRE(cuts.size() == 1);
    CHECK(crag.edges()[cuts[0].bypassed_edge] == EdgeKey::of(1, 4));
    CHECK(cuts[0].path.size() == 3);
  }
  SUBCASE("feasible assignment") {
    const Crag crag = abcd_crag();
    CHECK(separate_path_constraints(crag, assignment(crag, {E, C, D}, {EdgeKey::of(E, C)}).m).empty());
  }
}

TEST_CASE("brute force oracle") {
  SUBCASE("single candidate") {
    const Crag crag = crag_from_grid({{1}}, {});
    const auto s = brute_force(crag, CostTable{{-1.0}, {}});
    CHECK(s.y == std::vector<std::uint8_t>{1});
    CHECK(s.objective == -1.0);
  }
  SUBCASE("zero costs tie-break to all zeros") {
    const Crag crag = abcd_crag();
    const auto s = brute_force(crag, costs_by_id(crag, {}, {}, 0.0));
    CHECK(s == Solution::zeros(crag));
  }
  SUBCASE("too large") {
    std::vector<std::vector<int>> grid(1, std::vector<int>(14));
    for (int c = 0; c < 14; ++c) grid[0][c] = c + 1;
    const Crag crag = crag_from_grid(grid, {});
    REQUIRE(crag.num_candidates() + crag.num_edges() > kBruteForceLimit);
    try {
      brute_force(crag, costs_by_id(crag, {}, {}, 0.0));
      FAIL("no error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::TooLarge);
    }
  }
}

TEST_CASE("segmentation extraction") {
  const Crag crag = abcd_crag();
  SUBCASE("two-object solution") {
    const auto seg = extract_segmentation(crag, assignment(crag, {E, C, D}, {EdgeKey::of(E, C)}));
    // a b d / c c d
    CHECK(seg(0, 0) == 1);
    CHECK(seg(0, 1) == 1);
    CHECK(seg(1, 0) == 1);
    CHECK(seg(1, 1) == 1);
    CHECK(seg(0, 2) == 2);
    CHECK(seg(1, 2) == 2);
  }
  SUBCASE("all-zero solution is all background") {
    const auto seg = extract_segmentation(crag, Solution::zeros(crag));
    CHECK(std::all_of(seg.data().begin(), seg.data().end(), [](auto v) { return v == 0; }));
  }
  SUBCASE("two merged leaves share a label") {
    const auto seg = extract_segmentation(crag, assignment(crag, {A, B}, {EdgeKey::of(A, B)}));
    CHECK(seg(0, 0) == 1);
    CHECK(seg(0, 1) == 1);
    CHECK(seg(1, 0) == 0);
  }
  SUBCASE("labels follow row-major first pixel order") {
    const auto seg = extract_segmentation(crag, assignment(crag, {D, C, B}, {}));
    CHECK(seg(0, 0) == 0);
    CHECK(seg(0, 1) == 1);
    CHECK(seg(0, 2) == 2);
    CHECK(seg(1, 0) == 3);
  }
  SUBCASE("infeasible input") {
    try {
      extract_segmentation(crag, assignment(crag, {A, E}, {}));
      FAIL("no error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::InfeasibleSolution);
    }
  }
}

TEST_CASE("property: solver matches the oracle and nests across modes") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    CAPTURE(trial);
    const Crag crag = random_crag(rng);
    const CostTable costs = random_dyadic_costs(crag, rng);
    double objectives[3];
    int k = 0;
    for (const SolveMode mode : {SolveMode::Full, SolveMode::MergeTreeOnly, SolveMode::LeafMulticutOnly}) {
      const auto result = solve(crag, costs, {mode});
      const auto oracle = brute_force(crag, costs, mode);
      CHECK(result.optimal);
      CHECK(result.solution.objective == oracle.objective);
      CHECK(result.solution.objective == objective(costs, result.solution));
      CHECK(result.solution.objective <= 0.0);
      CHECK(validate_solution(crag, result.solution).empty());
      CHECK(respects_mode(crag, result.solution, mode));
      CHECK(separate_path_constraints(crag, result.solution.m).empty());
      for (std::size_t i = 1; i < result.iteration_objectives.size(); ++i) {
        CHECK(result.iteration_objectives[i - 1] <= result.iteration_objectives[i]);
      }
      CHECK(result.iteration_objectives.back() == result.solution.objective);
      objectives[k++] = result.solution.objective;
    }
    CHECK(objectives[0] <= objectives[1]);
    CHECK(objectives[0] <= objectives[2]);
  }
}

TEST_CASE("property: segmentation labels depend only on the partition") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    const Crag crag = random_crag(rng);
    const auto result = solve(crag, random_dyadic_costs(crag, rng));
    const auto seg = extract_segmentation(crag, result.solution);
    // labels appear in increasing order of first occurrence
    std::uint32_t max_seen = 0;
    for (auto v : seg.data()) {
      if (v == 0) continue;
      CHECK(v <= max_seen + 1);
      max_seen = std::max(max_seen, v);
    }
    // two pixels share a label iff their selected candidates are connected
    for (int p = 0; p < static_cast<int>(seg.size()); ++p) {
      for (int q = 0; q < static_cast<int>(seg.size()); ++q) {
        if (seg.data()[p] == 0 || seg.data()[q] == 0) continue;
        const int lp = crag.leaf_map().data()[p], lq = crag.leaf_map().data()[q];
        int sp = -1, sq = -1;
        for (int k : crag.chain(lp)) if (result.solution.y[k]) sp = k;
        for (int k : crag.chain(lq)) if (result.solution.y[k]) sq = k;
        const bool joined = sp == sq || !shortest_merged_path(crag, result.solution.m, sp, sq).empty();
        CHECK((seg.data()[p] == seg.data()[q]) == joined);
      }
    }
  }
}

TEST_CASE("time limit still yields a feasible assignment") {
  std::vector<std::vector<int>> grid(6, std::vector<int>(6));
  for (int r = 0; r < 6; ++r) {
    for (int c = 0; c < 6; ++c) grid[r][c] = r * 6 + c + 1;
  }
  const Crag crag = crag_from_grid(grid, {});
  std::mt19937_64 rng(5);
  const CostTable costs = random_dyadic_costs(crag, rng);
  const auto result = solve(crag, costs, {SolveMode::Full, 0.0});
  CHECK(validate_solution(crag, result.solution).empty());
  CHECK(result.solution.objective == objective(costs, result.solution));
}
