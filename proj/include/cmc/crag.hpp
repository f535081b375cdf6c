#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cmc/image.hpp"

namespace cmc {

using CandidateId = long long;

/// Unordered candidate pair, stored with u < v.
struct EdgeKey {
  CandidateId u = 0;
  CandidateId v = 0;

  static EdgeKey of(CandidateId a, CandidateId b) { return a < b ? EdgeKey{a, b} : EdgeKey{b, a}; }
  /// "u-v", the key used in JSON documents.
  std::string str() const;
  static EdgeKey parse(const std::string& key);

  auto operator<=>(const EdgeKey&) const = default;
};

/// Construction input for one candidate. Leaves carry pixels; non-leaf
/// candidates may leave `pixels` empty, in which case their pixel set is the
/// union of their children.
struct CandidateSpec {
  CandidateId id = 0;
  int level = 0;
  std::vector<Pixel> pixels;
};

struct SubsetEdge {
  CandidateId child = 0;
  CandidateId parent = 0;
};

/// Candidate region adjacency graph: candidates (V), adjacency edges (E)
/// and the subset forest (S). Immutable after construction.
///
/// Candidates and edges are addressed by dense indices. Candidate index
/// order is ascending id; edge index order is ascending EdgeKey.
class Crag {
 public:
  /// Validates and assembles a CRAG. If `cover` is given, the leaves must
  /// cover exactly the pixels where cover is non-zero; otherwise leaves may
  /// leave pixels unassigned (excluded background).
  static Crag build(std::vector<CandidateSpec> candidates, std::vector<EdgeKey> adjacency,
                    std::vector<SubsetEdge> subset, int width, int height,
                    const Image<std::uint8_t>* cover = nullptr);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }

  std::size_t num_candidates() const noexcept { return ids_.size(); }
  std::size_t num_edges() const noexcept { return edges_.size(); }

  CandidateId id(int index) const { return ids_[index]; }
  const std::vector<CandidateId>& ids() const noexcept { return ids_; }
  std::optional<int> find(CandidateId id) const;
  /// Index of `id`; throws InvalidCandidate if unknown.
  int index_of(CandidateId id) const;

  int level(int index) const { return levels_[index]; }
  /// Parent index or -1 for roots.
  int parent(int index) const { return parents_[index]; }
  const std::vector<int>& children(int index) const { return children_[index]; }
  bool is_leaf(int index) const { return children_[index].empty(); }
  /// Leaf indices below (or equal to) `index`, ascending.
  const std::vector<int>& leaves_under(int index) const { return leaves_under_[index]; }
  /// `index` followed by its ancestors up to the root.
  const std::vector<int>& chain(int index) const { return chains_[index]; }
  /// True iff one candidate is an ancestor of (or equal to) the other.
  bool overlaps(int a, int b) const;

  std::vector<int> leaves() const;
  /// Pixel set in row-major order; for non-leaves the union of the leaves.
  std::vector<Pixel> pixels(int index) const;
  std::size_t size(int index) const { return sizes_[index]; }
  /// Leaf index per pixel, -1 where no leaf is present.
  const Image<int>& leaf_map() const noexcept { return leaf_map_; }
  /// True iff pixel p belongs to candidate `index`.
  bool contains(int index, Pixel p) const;

  const std::vector<EdgeKey>& edges() const noexcept { return edges_; }
  const std::pair<int, int>& endpoints(int edge) const { return endpoints_[edge]; }
  std::optional<int> find_edge(EdgeKey key) const;
  const std::vector<int>& incident_edges(int index) const { return incident_[index]; }

 private:
  Crag() = default;

  int width_ = 0;
  int height_ = 0;
  std::vector<CandidateId> ids_;
  std::vector<int> levels_;
  std::vector<int> parents_;
  std::vector<std::vector<int>> children_;
  std::vector<std::vector<int>> leaves_under_;
  std::vector<std::vector<int>> chains_;
  std::vector<std::size_t> sizes_;
  std::vector<std::vector<Pixel>> leaf_pixels_;  // indexed by candidate, empty for non-leaves
  Image<int> leaf_map_;
  std::vector<EdgeKey> edges_;
  std::vector<std::pair<int, int>> endpoints_;
  std::vector<std::vector<int>> incident_;
};

/// Set of mutually overlapping candidates (indices, leaf first).
struct ConflictClique {
  std::vector<int> members;
};

/// One clique per leaf: the leaf and all of its ancestors.
std::vector<ConflictClique> conflict_cliques(const Crag& crag);

/// Binary assignment aligned with the CRAG's candidate and edge indices.
struct Solution {
  std::vector<std::uint8_t> y;
  std::vector<std::uint8_t> m;
  double objective = 0.0;

  static Solution zeros(const Crag& crag) {
    return Solution{std::vector<std::uint8_t>(crag.num_candidates(), 0),
                    std::vector<std::uint8_t>(crag.num_edges(), 0), 0.0};
  }
  bool operator==(const Solution&) const = default;
};

/// A path of adjacency edges (edge indices, ordered from one endpoint of
/// the bypassed edge to the other) that must not be fully merged while the
/// bypassed edge is cut.
struct PathConstraint {
  std::vector<int> path;
  int bypassed_edge = -1;

  bool operator==(const PathConstraint&) const = default;
};

enum class ConstraintFamily { Overlap, Incidence, Path };

struct Violation {
  ConstraintFamily family;
  /// Offending candidate ids: selected clique members (overlap), edge
  /// endpoints (incidence, path).
  std::vector<CandidateId> candidates;
  /// The edge at fault for incidence and path violations.
  std::optional<EdgeKey> edge;
  /// For path violations, a shortest merged path bypassing `edge`.
  std::vector<EdgeKey> path;

  std::string describe() const;
};

/// Checks overlap, incidence and path constraints. Returns every violation.
/// Throws KeyMismatch if the solution's sizes do not match the CRAG.
std::vector<Violation> validate_solution(const Crag& crag, const Solution& solution);

/// Shortest path (by edge count) from `from` to `to` using only edges with
/// merged[e] != 0, skipping `excluded_edge`. Empty if none exists.
std::vector<int> shortest_merged_path(const Crag& crag, const std::vector<std::uint8_t>& merged,
                                      int from, int to, int excluded_edge = -1);

}  // namespace cmc

namespace cmc {

/// Feasible-set restriction: the full model, merge-tree selection only
/// (all m = 0), or multicut over leaves only (y = 0 for non-leaves).
enum class SolveMode { Full, MergeTreeOnly, LeafMulticutOnly };

/// "full", "mt" or "mc".
std::string to_string(SolveMode mode);
/// Accepts "full", "mt", "mc" (and the long names); throws InvalidArgument otherwise.
SolveMode parse_solve_mode(const std::string& text);

}  // namespace cmc
