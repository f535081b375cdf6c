#include "support.hpp"

#include <algorithm>
#include <set>

namespace cmc::testing {

LabelImage label_image(const std::vector<std::vector<int>>& grid) {
  const int h = static_cast<int>(grid.size()), w = static_cast<int>(grid.front().size());
  LabelImage image(w, h, 0);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) image(r, c) = static_cast<std::uint32_t>(grid[r][c]);
  }
  return image;
}

Crag crag_from_grid(const std::vector<std::vector<int>>& grid, const std::vector<Merge>& merges) {
  const int h = static_cast<int>(grid.size()), w = static_cast<int>(grid.front().size());
  std::map<CandidateId, std::set<Pixel>> pixels;
  std::map<CandidateId, int> level;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (grid[r][c] != 0) pixels[grid[r][c]].insert({r, c});
    }
  }
  std::vector<CandidateSpec> specs;
  for (const auto& [id, px] : pixels) {
    specs.push_back({id, 0, {px.begin(), px.end()}});
    level[id] = 0;
  }
  std::vector<SubsetEdge> subset;
  for (const auto& m : merges) {
    auto& px = pixels[m.parent];
    px.insert(pixels.at(m.a).begin(), pixels.at(m.a).end());
    px.insert(pixels.at(m.b).begin(), pixels.at(m.b).end());
    level[m.parent] = 1 + std::max(level.at(m.a), level.at(m.b));
    specs.push_back({m.parent, level[m.parent], {}});
    subset.push_back({m.a, m.parent});
    subset.push_back({m.b, m.parent});
  }
  std::vector<EdgeKey> adjacency;
  for (auto i = pixels.begin(); i != pixels.end(); ++i) {
    for (auto j = std::next(i); j != pixels.end(); ++j) {
      bool disjoint = true, touching = false;
      for (const Pixel p : i->second) {
        if (j->second.count(p)) disjoint = false;
        for (int k = 0; k < 4; ++k) {
          if (j->second.count({p.row + kRowOffsets4[k], p.col + kColOffsets4[k]})) touching = true;
        }
      }
      if (disjoint && touching) adjacency.push_back(EdgeKey::of(i->first, j->first));
    }
  }
  return Crag::build(std::move(specs), std::move(adjacency), std::move(subset), w, h);
}

Crag abcd_crag() {
  return crag_from_grid({{A, B, D}, {C, C, D}}, {{A, B, E}, {C, D, F}, {E, F, G}});
}

Crag row_crag() { return crag_from_grid({{1, 2, 3, 4}}, {{1, 2, 5}, {3, 4, 6}, {5, 6, 7}}); }

CostTable row_costs(const Crag& crag) { return costs_by_id(crag, {{5, -1.0}, {3, -1.0}}, {{"3-5", -1.0}}, 1.0); }

Crag random_crag(std::mt19937_64& rng, int max_leaves, int max_depth, std::size_t max_variables) {
  while (true) {
    std::uniform_int_distribution<int> dim(2, 4);
    const int h = dim(rng), w = dim(rng);
    std::uniform_int_distribution<int> leaf_count(2, std::min(max_leaves, h * w));
    const int k = leaf_count(rng);

    // region growing from k distinct random seeds
    std::vector<std::vector<int>> grid(h, std::vector<int>(w, 0));
    std::vector<Pixel> cells;
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) cells.push_back({r, c});
    }
    std::shuffle(cells.begin(), cells.end(), rng);
    for (int i = 0; i < k; ++i) grid[cells[i].row][cells[i].col] = i + 1;
    bool grew = true;
    while (grew) {
      grew = false;
      std::shuffle(cells.begin(), cells.end(), rng);
      for (const Pixel p : cells) {
        if (grid[p.row][p.col] != 0) continue;
        for (int d = 0; d < 4; ++d) {
          const int r = p.row + kRowOffsets4[d], c = p.col + kColOffsets4[d];
          if (r >= 0 && c >= 0 && r < h && c < w && grid[r][c] != 0) {
            grid[p.row][p.col] = grid[r][c];
            grew = true;
            break;
          }
        }
      }
    }

    std::map<CandidateId, std::set<CandidateId>> members;  // node -> leaves
    std::map<CandidateId, int> depth;
    std::vector<CandidateId> roots;
    for (int i = 1; i <= k; ++i) {
      members[i] = {i};
      depth[i] = 0;
      roots.push_back(i);
    }
    auto touching = [&](CandidateId a, CandidateId b) {
      for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
          if (!members[a].count(grid[r][c])) continue;
          for (int d = 0; d < 4; ++d) {
            const int rr = r + kRowOffsets4[d], cc = c + kColOffsets4[d];
            if (rr >= 0 && cc >= 0 && rr < h && cc < w && grid[rr][cc] != 0 && members[b].count(grid[rr][cc])) return true;
          }
        }
      }
      return false;
    };
    std::vector<Merge> merges;
    std::uniform_int_distribution<int> merge_count(0, k - 1);
    const int wanted = merge_count(rng);
    CandidateId next = k + 1;
    for (int attempt = 0; attempt < 50 && static_cast<int>(merges.size()) < wanted; ++attempt) {
      std::uniform_int_distribution<std::size_t> pick(0, roots.size() - 1);
      const auto a = roots[pick(rng)], b = roots[pick(rng)];
      if (a == b || std::max(depth[a], depth[b]) + 1 > max_depth || !touching(a, b)) continue;
      members[next] = members[a];
      members[next].insert(members[b].begin(), members[b].end());
      depth[next] = std::max(depth[a], depth[b]) + 1;
      merges.push_back({a, b, next});
      roots.erase(std::find(roots.begin(), roots.end(), a));
      roots.erase(std::find(roots.begin(), roots.end(), b));
      roots.push_back(next);
      ++next;
    }
    // occasionally exclude an unmerged leaf to exercise background pixels
    if (std::uniform_int_distribution<int>(0, 9)(rng) == 0) {
      for (int i = k; i >= 1; --i) {
        if (std::find(roots.begin(), roots.end(), i) != roots.end() && k > 2) {
          for (auto& row : grid) {
            for (auto& v : row) {
              if (v == i) v = 0;
            }
          }
          break;
        }
      }
    }
    Crag crag = crag_from_grid(grid, merges);
    if (crag.num_candidates() + crag.num_edges() <= max_variables) return crag;
  }
}

CostTable random_dyadic_costs(const Crag& crag, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> k(-64, 64);
  CostTable costs;
  for (std::size_t i = 0; i < crag.num_candidates(); ++i) costs.f.push_back(k(rng) / 64.0);
  for (std::size_t e = 0; e < crag.num_edges(); ++e) costs.g.push_back(k(rng) / 64.0);
  return costs;
}

CostTable costs_by_id(const Crag& crag, const std::map<CandidateId, double>& f,
                      const std::map<std::string, double>& g, double fallback) {
  CostTable costs{std::vector<double>(crag.num_candidates(), fallback), std::vector<double>(crag.num_edges(), fallback)};
  for (const auto& [id, v] : f) costs.f[crag.index_of(id)] = v;
  for (const auto& [key, v] : g) costs.g[crag.find_edge(EdgeKey::parse(key)).value()] = v;
  return costs;
}

Solution assignment(const Crag& crag, const std::vector<CandidateId>& selected,
                    const std::vector<EdgeKey>& merged) {
  Solution s = Solution::zeros(crag);
  for (auto id : selected) s.y[crag.index_of(id)] = 1;
  for (auto e : merged) s.m[crag.find_edge(e).value()] = 1;
  return s;
}

}  // namespace cmc::testing
