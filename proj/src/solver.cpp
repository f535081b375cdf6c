#include "cmc/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "cmc/error.hpp"

namespace cmc {

namespace {

using Clock = std::chrono::steady_clock;

struct DisjointSets {
  explicit DisjointSets(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
  std::vector<int> parent;
};

/// Sets m = 1 on every edge inside a merged component, which turns any
/// assignment satisfying overlap and incidence into a feasible one.
void close_components(const Crag& crag, Solution& solution) {
  DisjointSets sets(static_cast<int>(crag.num_candidates()));
  for (int e = 0; e < static_cast<int>(crag.num_edges()); ++e) {
    if (solution.m[e]) sets.unite(crag.endpoints(e).first, crag.endpoints(e).second);
  }
  for (int e = 0; e < static_cast<int>(crag.num_edges()); ++e) {
    const auto [a, b] = crag.endpoints(e);
    if (sets.find(a) == sets.find(b)) solution.m[e] = 1;
  }
}

/// Depth-first branch-and-bound over the y and m indicators for a fixed pool
/// of path constraints.
class BranchAndBound {
 public:
  BranchAndBound(const Crag& crag, const CostTable& costs, SolveMode mode,
                 const std::vector<PathConstraint>& pool, Clock::time_point deadline)
      : crag_(crag),
        costs_(costs),
        pool_(pool),
        deadline_(deadline),
        n_(static_cast<int>(crag.num_candidates())),
        e_(static_cast<int>(crag.num_edges())),
        value_(n_ + e_, kFree),
        constraints_of_(e_) {
    descendants_.assign(n_, {});
    for (int i = 0; i < n_; ++i) {
      for (std::size_t k = 1; k < crag.chain(i).size(); ++k) descendants_[crag.chain(i)[k]].push_back(i);
    }
    // children before parents
    post_order_.resize(n_);
    std::iota(post_order_.begin(), post_order_.end(), 0);
    std::stable_sort(post_order_.begin(), post_order_.end(), [&](int a, int b) {
      return crag.chain(a).size() > crag.chain(b).size();
    });
    for (int c = 0; c < static_cast<int>(pool_.size()); ++c) {
      for (int e : pool_[c].path) constraints_of_[e].push_back(c);
      constraints_of_[pool_[c].bypassed_edge].push_back(c);
    }
    branch_order_.resize(n_ + e_);
    std::iota(branch_order_.begin(), branch_order_.end(), 0);
    std::stable_sort(branch_order_.begin(), branch_order_.end(),
                     [&](int a, int b) { return std::abs(coefficient(a)) > std::abs(coefficient(b)); });

    root_consistent_ = true;
    if (mode == SolveMode::MergeTreeOnly) {
      for (int e = 0; e < e_; ++e) root_consistent_ = root_consistent_ && assign(n_ + e, 0);
    } else if (mode == SolveMode::LeafMulticutOnly) {
      for (int i = 0; i < n_; ++i) {
        if (!crag.is_leaf(i)) root_consistent_ = root_consistent_ && assign(i, 0);
      }
    }
    root_consistent_ = root_consistent_ && propagate();
  }

  /// Runs the search seeded with a feasible incumbent. Returns false if the
  /// deadline interrupted it.
  bool run(const Solution& incumbent) {
    best_ = incumbent;
    best_value_ = objective(costs_, best_);
    if (root_consistent_) search();
    return !timed_out_;
  }

  const Solution& best() const { return best_; }
  std::size_t nodes() const { return nodes_; }

 private:
  static constexpr std::int8_t kFree = -1;

  double coefficient(int v) const { return v < n_ ? costs_.f[v] : costs_.g[v - n_]; }

  bool assign(int v, std::int8_t val) {
    if (value_[v] == val) return true;
    if (value_[v] != kFree) return false;
    value_[v] = val;
    trail_.push_back(v);
    pending_.push_back(v);
    return true;
  }

  void undo(std::size_t mark) {
    while (trail_.size() > mark) {
      value_[trail_.back()] = kFree;
      trail_.pop_back();
    }
    pending_.clear();
  }

  bool check_path_constraint(const PathConstraint& c) {
    int ones = 0, free = -1, n_free = 0;
    for (int e : c.path) {
      const auto v = value_[n_ + e];
      if (v == 1) {
        ++ones;
      } else if (v == kFree) {
        ++n_free;
        free = e;
      }
    }
    const int len = static_cast<int>(c.path.size());
    const auto bypass = value_[n_ + c.bypassed_edge];
    if (ones == len) return assign(n_ + c.bypassed_edge, 1);
    if (bypass == 0 && ones == len - 1 && n_free == 1) return assign(n_ + free, 0);
    return true;
  }

  bool propagate() {
    while (!pending_.empty()) {
      const int v = pending_.back();
      pending_.pop_back();
      const auto val = value_[v];
      if (v < n_) {
        if (val == 1) {
          const auto& chain = crag_.chain(v);
          for (std::size_t k = 1; k < chain.size(); ++k) {
            if (!assign(chain[k], 0)) return false;
          }
          for (int d : descendants_[v]) {
            if (!assign(d, 0)) return false;
          }
        } else {
          for (int e : crag_.incident_edges(v)) {
            if (!assign(n_ + e, 0)) return false;
          }
        }
      } else {
        const int e = v - n_;
        if (val == 1) {
          const auto [a, b] = crag_.endpoints(e);
          if (!assign(a, 1) || !assign(b, 1)) return false;
        }
        for (int c : constraints_of_[e]) {
          if (!check_path_constraint(pool_[c])) return false;
        }
      }
    }
    return true;
  }

  // Valid lower bound on every completion of the current partial assignment.
  // Each negative free edge cost is split onto its free endpoints (m_e <= y),
  // and the resulting node potentials are minimized exactly over antichains
  // of the subset forest.
  double lower_bound() {
    double fixed = 0.0;
    potential_.assign(n_, 0.0);
    for (int i = 0; i < n_; ++i) {
      if (value_[i] == 1) fixed += costs_.f[i];
      if (value_[i] == kFree) potential_[i] = costs_.f[i];
    }
    for (int e = 0; e < e_; ++e) {
      const double g = costs_.g[e];
      const auto val = value_[n_ + e];
      if (val == 1) {
        fixed += g;
        continue;
      }
      if (val == 0 || g >= 0) continue;
      const auto [a, b] = crag_.endpoints(e);
      const bool a_free = value_[a] == kFree, b_free = value_[b] == kFree;
      if (a_free && b_free) {
        potential_[a] += 0.5 * g;
        potential_[b] += 0.5 * g;
      } else if (a_free) {
        potential_[a] += g;
      } else if (b_free) {
        potential_[b] += g;
      } else {
        fixed += g;
      }
    }
    subtree_.assign(n_, 0.0);
    double total = fixed;
    for (int i : post_order_) {
      double best = subtree_[i];
      if (value_[i] == kFree) best = std::min(best, potential_[i]);
      if (value_[i] == 1) best = 0.0;
      const int parent = crag_.parent(i);
      if (parent == -1) {
        total += best;
      } else {
        subtree_[parent] += best;
      }
    }
    return total;
  }

  void record_leaf() {
    Solution candidate{std::vector<std::uint8_t>(n_), std::vector<std::uint8_t>(e_), 0.0};
    for (int i = 0; i < n_; ++i) candidate.y[i] = static_cast<std::uint8_t>(value_[i]);
    for (int e = 0; e < e_; ++e) candidate.m[e] = static_cast<std::uint8_t>(value_[n_ + e]);
    candidate.objective = objective(costs_, candidate);
    if (candidate.objective < best_value_) {
      best_value_ = candidate.objective;
      best_ = std::move(candidate);
    }
  }

  void search() {
    if (timed_out_) return;
    if ((++nodes_ & 1023) == 0 && Clock::now() > deadline_) {
      timed_out_ = true;
      return;
    }
    if (lower_bound() >= best_value_) return;
    int branch = -1;
    for (int v : branch_order_) {
      if (value_[v] == kFree) {
        branch = v;
        break;
      }
    }
    if (branch == -1) {
      record_leaf();
      return;
    }
    const std::int8_t first = coefficient(branch) < 0 ? 1 : 0;
    for (const std::int8_t val : {first, static_cast<std::int8_t>(1 - first)}) {
      const std::size_t mark = trail_.size();
      if (assign(branch, val) && propagate()) search();
      undo(mark);
      if (timed_out_) return;
    }
  }

  const Crag& crag_;
  const CostTable& costs_;
  const std::vector<PathConstraint>& pool_;
  Clock::time_point deadline_;
  int n_;
  int e_;
  std::vector<std::int8_t> value_;
  std::vector<std::vector<int>> constraints_of_;
  std::vector<std::vector<int>> descendants_;
  std::vector<int> post_order_;
  std::vector<int> branch_order_;
  std::vector<int> trail_;
  std::vector<int> pending_;
  std::vector<double> potential_;
  std::vector<double> subtree_;
  bool root_consistent_ = true;
  bool timed_out_ = false;
  std::size_t nodes_ = 0;
  Solution best_;
  double best_value_ = 0.0;
};

}  // namespace

bool respects_mode(const Crag& crag, const Solution& solution, SolveMode mode) {
  switch (mode) {
    case SolveMode::Full:
      return true;
    case SolveMode::MergeTreeOnly:
      return std::all_of(solution.m.begin(), solution.m.end(), [](auto v) { return v == 0; });
    case SolveMode::LeafMulticutOnly:
      for (int i = 0; i < static_cast<int>(crag.num_candidates()); ++i) {
        if (!crag.is_leaf(i) && solution.y[i]) return false;
      }
      return true;
  }
  return true;
}

std::vector<PathConstraint> separate_path_constraints(const Crag& crag, const std::vector<std::uint8_t>& m) {
  DisjointSets sets(static_cast<int>(crag.num_candidates()));
  for (int e = 0; e < static_cast<int>(crag.num_edges()); ++e) {
    if (m[e]) sets.unite(crag.endpoints(e).first, crag.endpoints(e).second);
  }
  std::vector<PathConstraint> cuts;
  for (int e = 0; e < static_cast<int>(crag.num_edges()); ++e) {
    if (m[e]) continue;
    const auto [a, b] = crag.endpoints(e);
    if (sets.find(a) != sets.find(b)) continue;
    cuts.push_back({shortest_merged_path(crag, m, a, b, e), e});
  }
  return cuts;
}

SolveResult solve(const Crag& crag, const CostTable& costs, const SolveOptions& options) {
  check_costs(crag, costs);
  const auto deadline =
      Clock::now() + std::chrono::duration_cast<Clock::duration>(
                         std::chrono::duration<double>(std::max(0.0, options.time_limit_seconds)));

  SolveResult result;
  Solution feasible = Solution::zeros(crag);
  feasible.objective = objective(costs, feasible);
  std::vector<PathConstraint> pool;
  std::set<std::pair<int, std::vector<int>>> seen;

  while (true) {
    BranchAndBound search(crag, costs, options.mode, pool, deadline);
    const bool completed = search.run(feasible);
    ++result.iterations;
    result.nodes += search.nodes();
    Solution relaxed = search.best();
    if (completed) result.iteration_objectives.push_back(relaxed.objective);

    auto cuts = separate_path_constraints(crag, relaxed.m);
    if (cuts.empty()) {
      result.solution = std::move(relaxed);
      result.optimal = completed;
      break;
    }
    close_components(crag, relaxed);
    relaxed.objective = objective(costs, relaxed);
    if (relaxed.objective < feasible.objective) feasible = relaxed;
    if (!completed) {
      result.solution = feasible;
      result.optimal = false;
      break;
    }
    for (auto& cut : cuts) {
      if (seen.emplace(cut.bypassed_edge, cut.path).second) pool.push_back(std::move(cut));
    }
  }
  result.path_constraints = pool.size();
  return result;
}

Solution brute_force(const Crag& crag, const CostTable& costs, SolveMode mode) {
  check_costs(crag, costs);
  const int n = static_cast<int>(crag.num_candidates());
  const int e_count = static_cast<int>(crag.num_edges());
  if (static_cast<std::size_t>(n + e_count) > kBruteForceLimit) {
    throw Error(ErrorCode::TooLarge, "brute force limited to " + std::to_string(kBruteForceLimit) + " variables");
  }
  const auto cliques = conflict_cliques(crag);

  Solution best = Solution::zeros(crag);
  best.objective = objective(costs, best);
  bool found = false;
  Solution current = Solution::zeros(crag);

  // Bit (n-1-i) of ybits is y_i, so ascending ybits is lexicographic order.
  for (std::uint64_t ybits = 0; ybits < (std::uint64_t{1} << n); ++ybits) {
    for (int i = 0; i < n; ++i) current.y[i] = (ybits >> (n - 1 - i)) & 1;
    // Assignments failing overlap cannot pass validation; skip their m loop.
    bool overlap_ok = true;
    for (const auto& clique : cliques) {
      int selected = 0;
      for (int k : clique.members) selected += current.y[k];
      overlap_ok = overlap_ok && selected <= 1;
    }
    if (!overlap_ok) continue;

    // Only edges with both endpoints selected can be merged (incidence).
    std::vector<int> free_edges;
    if (mode != SolveMode::MergeTreeOnly) {
      for (int e = 0; e < e_count; ++e) {
        const auto [a, b] = crag.endpoints(e);
        if (current.y[a] && current.y[b]) free_edges.push_back(e);
      }
    }
    const int k = static_cast<int>(free_edges.size());
    for (std::uint64_t mbits = 0; mbits < (std::uint64_t{1} << k); ++mbits) {
      std::fill(current.m.begin(), current.m.end(), 0);
      for (int j = 0; j < k; ++j) current.m[free_edges[j]] = (mbits >> (k - 1 - j)) & 1;
      if (!respects_mode(crag, current, mode)) continue;
      if (!validate_solution(crag, current).empty()) continue;
      const double value = objective(costs, current);
      if (!found || value < best.objective) {
        best = current;
        best.objective = value;
        found = true;
      }
    }
  }
  return best;
}

LabelImage extract_segmentation(const Crag& crag, const Solution& solution) {
  const auto violations = validate_solution(crag, solution);
  if (!violations.empty()) {
    throw Error(ErrorCode::InfeasibleSolution, violations.front().describe());
  }
  const int n = static_cast<int>(crag.num_candidates());
  DisjointSets sets(n);
  for (int e = 0; e < static_cast<int>(crag.num_edges()); ++e) {
    if (solution.m[e]) sets.unite(crag.endpoints(e).first, crag.endpoints(e).second);
  }
  // Each covered pixel belongs to the unique selected candidate on its leaf's chain.
  LabelImage components(crag.width(), crag.height(), 0);
  const auto& leaf_map = crag.leaf_map();
  std::vector<int> first_label(n, 0);
  std::uint32_t next_label = 0;
  for (int r = 0; r < crag.height(); ++r) {
    for (int c = 0; c < crag.width(); ++c) {
      const int leaf = leaf_map(r, c);
      if (leaf == -1) continue;
      for (int k : crag.chain(leaf)) {
        if (!solution.y[k]) continue;
        const int root = sets.find(k);
        if (first_label[root] == 0) first_label[root] = static_cast<int>(++next_label);
        components(r, c) = static_cast<std::uint32_t>(first_label[root]);
        break;
      }
    }
  }
  return components;
}

}  // namespace cmc
