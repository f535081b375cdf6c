#include "cmc/crag.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "cmc/error.hpp"

namespace cmc {

std::string EdgeKey::str() const { return std::to_string(u) + "-" + std::to_string(v); }

EdgeKey EdgeKey::parse(const std::string& key) {
  // ids are non-negative in practice, but allow a leading minus on each side
  const auto dash = key.find('-', 1);
  if (dash == std::string::npos) throw Error(ErrorCode::Parse, "bad edge key '" + key + "'");
  try {
    std::size_t used_a = 0, used_b = 0;
    const std::string a = key.substr(0, dash), b = key.substr(dash + 1);
    const CandidateId ia = std::stoll(a, &used_a), ib = std::stoll(b, &used_b);
    if (used_a != a.size() || used_b != b.size()) throw std::invalid_argument(key);
    return EdgeKey::of(ia, ib);
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::Parse, "bad edge key '" + key + "'");
  }
}

Crag Crag::build(std::vector<CandidateSpec> candidates, std::vector<EdgeKey> adjacency,
                 std::vector<SubsetEdge> subset, int width, int height,
                 const Image<std::uint8_t>* cover) {
  if (width <= 0 || height <= 0) {
    throw Error(ErrorCode::InvalidArgument, "image dimensions must be positive");
  }
  Crag crag;
  crag.width_ = width;
  crag.height_ = height;

  std::sort(candidates.begin(), candidates.end(),
            [](const CandidateSpec& a, const CandidateSpec& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    if (candidates[i].id == candidates[i - 1].id) {
      throw Error(ErrorCode::InvalidCandidate, "duplicate candidate id", {candidates[i].id});
    }
  }
  const int n = static_cast<int>(candidates.size());
  for (const auto& c : candidates) {
    crag.ids_.push_back(c.id);
    if (c.level < 0) throw Error(ErrorCode::InvalidCandidate, "negative level", {c.id});
    crag.levels_.push_back(c.level);
  }

  // Subset forest.
  crag.parents_.assign(n, -1);
  crag.children_.assign(n, {});
  for (const auto& s : subset) {
    const int child = crag.index_of(s.child);
    const int parent = crag.index_of(s.parent);
    if (child == parent) throw Error(ErrorCode::SubsetNotForest, "self subset edge", {s.child});
    if (crag.parents_[child] != -1 && crag.parents_[child] != parent) {
      throw Error(ErrorCode::SubsetNotForest, "candidate has two parents",
                  {s.child, crag.ids_[crag.parents_[child]], s.parent});
    }
    if (crag.parents_[child] == parent) continue;
    crag.parents_[child] = parent;
    crag.children_[parent].push_back(child);
  }
  for (auto& ch : crag.children_) std::sort(ch.begin(), ch.end());

  crag.chains_.assign(n, {});
  for (int i = 0; i < n; ++i) {
    auto& chain = crag.chains_[i];
    for (int k = i; k != -1; k = crag.parents_[k]) {
      if (static_cast<int>(chain.size()) > n) {
        throw Error(ErrorCode::SubsetNotForest, "cycle in subset relation", {crag.ids_[i]});
      }
      chain.push_back(k);
    }
  }

  // Leaf pixels and the leaf map.
  crag.leaf_pixels_.assign(n, {});
  crag.leaf_map_ = Image<int>(width, height, -1);
  for (int i = 0; i < n; ++i) {
    auto& spec = candidates[i];
    if (!crag.children_[i].empty()) continue;
    if (spec.pixels.empty()) throw Error(ErrorCode::InvalidCandidate, "leaf without pixels", {spec.id});
    std::sort(spec.pixels.begin(), spec.pixels.end());
    for (std::size_t k = 0; k < spec.pixels.size(); ++k) {
      const Pixel p = spec.pixels[k];
      if (!crag.leaf_map_.contains(p)) {
        throw Error(ErrorCode::InvalidCandidate, "pixel outside image", {spec.id});
      }
      if (k > 0 && spec.pixels[k - 1] == p) {
        throw Error(ErrorCode::InvalidCandidate, "duplicate pixel", {spec.id});
      }
      int& owner = crag.leaf_map_(p);
      if (owner != -1) {
        throw Error(ErrorCode::OverlappingLeaves,
                    "leaves share pixel (" + std::to_string(p.row) + "," + std::to_string(p.col) + ")",
                    {crag.ids_[owner], spec.id});
      }
      owner = i;
    }
    crag.leaf_pixels_[i] = std::move(spec.pixels);
  }
  if (cover != nullptr) {
    if (cover->width() != width || cover->height() != height) {
      throw Error(ErrorCode::DimensionMismatch, "cover mask dimensions differ from CRAG");
    }
    for (int r = 0; r < height; ++r) {
      for (int c = 0; c < width; ++c) {
        const bool covered = crag.leaf_map_(r, c) != -1;
        if (covered != ((*cover)(r, c) != 0)) {
          std::vector<long long> ids;
          if (covered) ids.push_back(crag.ids_[crag.leaf_map_(r, c)]);
          throw Error(ErrorCode::LeavesDoNotCoverImage,
                      "leaf coverage differs from mask at (" + std::to_string(r) + "," +
                          std::to_string(c) + ")",
                      ids);
        }
      }
    }
  }

  crag.leaves_under_.assign(n, {});
  crag.sizes_.assign(n, 0);
  for (int i = 0; i < n; ++i) {
    if (!crag.children_[i].empty()) continue;
    for (int k : crag.chains_[i]) {
      crag.leaves_under_[k].push_back(i);
      crag.sizes_[k] += crag.leaf_pixels_[i].size();
    }
  }
  for (auto& lv : crag.leaves_under_) std::sort(lv.begin(), lv.end());

  // Explicit pixels on non-leaves must agree with the union of their leaves.
  for (int i = 0; i < n; ++i) {
    if (crag.children_[i].empty() || candidates[i].pixels.empty()) continue;
    auto given = candidates[i].pixels;
    std::sort(given.begin(), given.end());
    if (given != crag.pixels(i)) {
      throw Error(ErrorCode::InvalidCandidate, "pixels differ from union of children",
                  {candidates[i].id});
    }
  }

  // Leaf adjacency (4-neighborhood), used to check that edges touch.
  std::set<std::pair<int, int>> leaf_adjacent;
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      const int a = crag.leaf_map_(r, c);
      if (a == -1) continue;
      if (c + 1 < width) {
        const int b = crag.leaf_map_(r, c + 1);
        if (b != -1 && b != a) leaf_adjacent.insert({std::min(a, b), std::max(a, b)});
      }
      if (r + 1 < height) {
        const int b = crag.leaf_map_(r + 1, c);
        if (b != -1 && b != a) leaf_adjacent.insert({std::min(a, b), std::max(a, b)});
      }
    }
  }

  for (auto& e : adjacency) e = EdgeKey::of(e.u, e.v);
  std::sort(adjacency.begin(), adjacency.end());
  adjacency.erase(std::unique(adjacency.begin(), adjacency.end()), adjacency.end());
  crag.incident_.assign(n, {});
  for (const auto& e : adjacency) {
    const int a = crag.index_of(e.u);
    const int b = crag.index_of(e.v);
    if (crag.overlaps(a, b)) {
      throw Error(ErrorCode::AdjacencyBetweenOverlapping, "edge " + e.str() + " joins overlapping candidates",
                  {e.u, e.v});
    }
    bool touching = false;
    for (int la : crag.leaves_under_[a]) {
      for (int lb : crag.leaves_under_[b]) {
        if (leaf_adjacent.count({std::min(la, lb), std::max(la, lb)})) {
          touching = true;
          break;
        }
      }
      if (touching) break;
    }
    if (!touching) {
      throw Error(ErrorCode::AdjacencyNotTouching, "edge " + e.str() + " joins non-touching candidates",
                  {e.u, e.v});
    }
    const int index = static_cast<int>(crag.edges_.size());
    crag.edges_.push_back(e);
    crag.endpoints_.push_back({a, b});
    crag.incident_[a].push_back(index);
    crag.incident_[b].push_back(index);
  }
  return crag;
}

std::optional<int> Crag::find(CandidateId id) const {
  auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
  if (it == ids_.end() || *it != id) return std::nullopt;
  return static_cast<int>(it - ids_.begin());
}

int Crag::index_of(CandidateId id) const {
  auto index = find(id);
  if (!index) throw Error(ErrorCode::InvalidCandidate, "unknown candidate id " + std::to_string(id), {id});
  return *index;
}

bool Crag::overlaps(int a, int b) const {
  const auto& ca = chains_[a];
  const auto& cb = chains_[b];
  return std::find(ca.begin(), ca.end(), b) != ca.end() || std::find(cb.begin(), cb.end(), a) != cb.end();
}

std::vector<int> Crag::leaves() const {
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(num_candidates()); ++i) {
    if (is_leaf(i)) out.push_back(i);
  }
  return out;
}

std::vector<Pixel> Crag::pixels(int index) const {
  if (is_leaf(index)) return leaf_pixels_[index];
  std::vector<Pixel> out;
  out.reserve(sizes_[index]);
  for (int leaf : leaves_under_[index]) {
    out.insert(out.end(), leaf_pixels_[leaf].begin(), leaf_pixels_[leaf].end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool Crag::contains(int index, Pixel p) const {
  if (!leaf_map_.contains(p)) return false;
  const int leaf = leaf_map_(p);
  if (leaf == -1) return false;
  const auto& chain = chains_[leaf];
  return std::find(chain.begin(), chain.end(), index) != chain.end();
}

std::optional<int> Crag::find_edge(EdgeKey key) const {
  key = EdgeKey::of(key.u, key.v);
  auto it = std::lower_bound(edges_.begin(), edges_.end(), key);
  if (it == edges_.end() || *it != key) return std::nullopt;
  return static_cast<int>(it - edges_.begin());
}

std::vector<ConflictClique> conflict_cliques(const Crag& crag) {
  // Chains of distinct leaves differ in their leaf, so none is a subset of another.
  std::vector<ConflictClique> cliques;
  for (int leaf : crag.leaves()) cliques.push_back({crag.chain(leaf)});
  return cliques;
}

std::string Violation::describe() const {
  std::ostringstream out;
  switch (family) {
    case ConstraintFamily::Overlap: out << "overlap:"; break;
    case ConstraintFamily::Incidence: out << "incidence:"; break;
    case ConstraintFamily::Path: out << "path:"; break;
  }
  for (auto id : candidates) out << " " << id;
  if (edge) out << " edge " << edge->str();
  if (!path.empty()) {
    out << " via";
    for (const auto& e : path) out << " " << e.str();
  }
  return out.str();
}

std::vector<int> shortest_merged_path(const Crag& crag, const std::vector<std::uint8_t>& merged,
                                      int from, int to, int excluded_edge) {
  const int n = static_cast<int>(crag.num_candidates());
  std::vector<int> via(n, -2);  // edge used to reach a node; -1 for the source
  std::deque<int> queue{from};
  via[from] = -1;
  while (!queue.empty() && via[to] == -2) {
    const int node = queue.front();
    queue.pop_front();
    for (int e : crag.incident_edges(node)) {
      if (e == excluded_edge || !merged[e]) continue;
      const auto [a, b] = crag.endpoints(e);
      const int next = a == node ? b : a;
      if (via[next] != -2) continue;
      via[next] = e;
      queue.push_back(next);
    }
  }
  if (via[to] == -2 || from == to) return {};
  std::vector<int> path;
  for (int node = to; node != from;) {
    const int e = via[node];
    path.push_back(e);
    const auto [a, b] = crag.endpoints(e);
    node = a == node ? b : a;
  }
  std::reverse(path.begin(), path.end());
  return path;
}

namespace {

struct DisjointSets {
  explicit DisjointSets(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
  std::vector<int> parent;
};

}  // namespace

std::vector<Violation> validate_solution(const Crag& crag, const Solution& solution) {
  if (solution.y.size() != crag.num_candidates() || solution.m.size() != crag.num_edges()) {
    throw Error(ErrorCode::KeyMismatch, "solution size does not match CRAG");
  }
  std::vector<Violation> violations;

  for (const auto& clique : conflict_cliques(crag)) {
    std::vector<CandidateId> selected;
    for (int k : clique.members) {
      if (solution.y[k]) selected.push_back(crag.id(k));
    }
    if (selected.size() > 1) violations.push_back({ConstraintFamily::Overlap, selected, std::nullopt, {}});
  }

  for (int e = 0; e < static_cast<int>(crag.num_edges()); ++e) {
    if (!solution.m[e]) continue;
    const auto [a, b] = crag.endpoints(e);
    if (!solution.y[a] || !solution.y[b]) {
      violations.push_back(
          {ConstraintFamily::Incidence, {crag.id(a), crag.id(b)}, crag.edges()[e], {}});
    }
  }

  DisjointSets components(static_cast<int>(crag.num_candidates()));
  for (int e = 0; e < static_cast<int>(crag.num_edges()); ++e) {
    if (solution.m[e]) components.unite(crag.endpoints(e).first, crag.endpoints(e).second);
  }
  for (int e = 0; e < static_cast<int>(crag.num_edges()); ++e) {
    if (solution.m[e]) continue;
    const auto [a, b] = crag.endpoints(e);
    if (components.find(a) != components.find(b)) continue;
    Violation v{ConstraintFamily::Path, {crag.id(a), crag.id(b)}, crag.edges()[e], {}};
    for (int p : shortest_merged_path(crag, solution.m, a, b, e)) v.path.push_back(crag.edges()[p]);
    violations.push_back(std::move(v));
  }
  return violations;
}

}  // namespace cmc

namespace cmc {

std::string to_string(SolveMode mode) {
  switch (mode) {
    case SolveMode::Full: return "full";
    case SolveMode::MergeTreeOnly: return "mt";
    case SolveMode::LeafMulticutOnly: return "mc";
  }
  return "full";
}

SolveMode parse_solve_mode(const std::string& text) {
  if (text == "full") return SolveMode::Full;
  if (text == "mt" || text == "merge_tree_only") return SolveMode::MergeTreeOnly;
  if (text == "mc" || text == "leaf_multicut_only") return SolveMode::LeafMulticutOnly;
  throw Error(ErrorCode::InvalidArgument, "unknown mode '" + text + "'");
}

}  // namespace cmc
