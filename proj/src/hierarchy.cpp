#include "cmc/hierarchy.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <set>
#include <tuple>
#include <unordered_map>

#include "cmc/error.hpp"

namespace cmc {

LabelImage seeded_watershed(const BoundaryMap& boundary, double seed_threshold) {
  check_unit_range(boundary);
  if (!(seed_threshold >= 0.0 && seed_threshold <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "seed threshold must lie in [0,1]");
  }
  const int w = boundary.width(), h = boundary.height();
  LabelImage labels(w, h, 0);

  std::uint32_t next_label = 0;
  std::vector<Pixel> stack;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (labels(r, c) != 0 || !(boundary(r, c) < seed_threshold)) continue;
      ++next_label;
      labels(r, c) = next_label;
      stack.push_back({r, c});
      while (!stack.empty()) {
        const Pixel p = stack.back();
        stack.pop_back();
        for (int k = 0; k < 4; ++k) {
          const Pixel q{p.row + kRowOffsets4[k], p.col + kColOffsets4[k]};
          if (labels.contains(q) && labels(q) == 0 && boundary(q) < seed_threshold) {
            labels(q) = next_label;
            stack.push_back(q);
          }
        }
      }
    }
  }
  if (next_label == 0) throw Error(ErrorCode::NoSeeds, "no pixel below seed threshold");

  // (value, insertion counter, pixel) -- the counter gives FIFO order among equal values
  using Entry = std::tuple<double, std::uint64_t, int, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
  Image<std::uint8_t> queued(w, h, 0);
  std::uint64_t counter = 0;
  auto push_neighbors = [&](Pixel p) {
    for (int k = 0; k < 4; ++k) {
      const Pixel q{p.row + kRowOffsets4[k], p.col + kColOffsets4[k]};
      if (labels.contains(q) && labels(q) == 0 && !queued(q)) {
        queued(q) = 1;
        queue.emplace(boundary(q), counter++, q.row, q.col);
      }
    }
  };
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (labels(r, c) != 0) push_neighbors({r, c});
    }
  }
  while (!queue.empty()) {
    const auto [value, order, r, c] = queue.top();
    queue.pop();
    double best_value = 2.0;
    std::uint32_t best_label = 0;
    for (int k = 0; k < 4; ++k) {
      const Pixel q{r + kRowOffsets4[k], c + kColOffsets4[k]};
      if (!labels.contains(q) || labels(q) == 0) continue;
      const double v = boundary(q);
      if (v < best_value || (v == best_value && labels(q) > best_label)) {
        best_value = v;
        best_label = labels(q);
      }
    }
    labels(r, c) = best_label;
    push_neighbors({r, c});
  }
  return labels;
}

double median(std::vector<double> values) {
  if (values.empty()) throw Error(ErrorCode::InvalidArgument, "median of empty list");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + mid);
  return 0.5 * (lower + upper);
}

std::vector<double> interface_intensities(const std::vector<Pixel>& a, const std::vector<Pixel>& b,
                                          const BoundaryMap& boundary) {
  std::set<Pixel> in_b(b.begin(), b.end());
  std::vector<double> out;
  for (const Pixel p : a) {
    for (int k = 0; k < 4; ++k) {
      const Pixel q{p.row + kRowOffsets4[k], p.col + kColOffsets4[k]};
      if (in_b.count(q)) out.push_back(std::max(boundary(p), boundary(q)));
    }
  }
  return out;
}

double merge_score(std::size_t size_a, std::size_t size_b, std::vector<double> interface) {
  if (interface.empty()) throw Error(ErrorCode::NotAdjacent, "regions share no interface");
  return static_cast<double>(std::min(size_a, size_b)) * median(std::move(interface));
}

double merge_score(const std::vector<Pixel>& a, const std::vector<Pixel>& b, const BoundaryMap& boundary) {
  return merge_score(a.size(), b.size(), interface_intensities(a, b, boundary));
}

namespace {

using RegionPair = std::pair<CandidateId, CandidateId>;

RegionPair ordered(CandidateId a, CandidateId b) { return a < b ? RegionPair{a, b} : RegionPair{b, a}; }

}  // namespace

MergeTree build_merge_tree(const LabelImage& superpixels, const BoundaryMap& boundary) {
  if (superpixels.width() != boundary.width() || superpixels.height() != boundary.height()) {
    throw Error(ErrorCode::DimensionMismatch, "superpixels and boundary map differ in size");
  }
  MergeTree tree{superpixels, {}};

  std::map<CandidateId, std::size_t> sizes;
  std::map<RegionPair, std::vector<double>> interfaces;
  const int w = superpixels.width(), h = superpixels.height();
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const auto a = superpixels(r, c);
      if (a == 0) continue;
      ++sizes[a];
      for (const auto& [dr, dc] : {std::pair{0, 1}, std::pair{1, 0}}) {
        if (r + dr >= h || c + dc >= w) continue;
        const auto b = superpixels(r + dr, c + dc);
        if (b == 0 || b == a) continue;
        interfaces[ordered(a, b)].push_back(std::max(boundary(r, c), boundary(r + dr, c + dc)));
      }
    }
  }
  if (sizes.empty()) return tree;

  std::map<CandidateId, std::set<CandidateId>> neighbors;
  std::set<std::tuple<double, CandidateId, CandidateId>> queue;
  std::map<RegionPair, double> scores;
  auto add_edge = [&](RegionPair pair) {
    const double score = merge_score(sizes[pair.first], sizes[pair.second], interfaces[pair]);
    scores[pair] = score;
    queue.emplace(score, pair.first, pair.second);
    neighbors[pair.first].insert(pair.second);
    neighbors[pair.second].insert(pair.first);
  };
  auto remove_edge = [&](RegionPair pair) {
    queue.erase({scores.at(pair), pair.first, pair.second});
    scores.erase(pair);
    interfaces.erase(pair);
    neighbors[pair.first].erase(pair.second);
    neighbors[pair.second].erase(pair.first);
  };
  for (const auto& [pair, values] : interfaces) add_edge(pair);

  CandidateId next_id = sizes.rbegin()->first + 1;
  while (!queue.empty()) {
    const auto [score, a, b] = *queue.begin();
    const CandidateId merged = next_id++;
    tree.events.push_back({a, b, merged, score});
    sizes[merged] = sizes[a] + sizes[b];

    std::map<CandidateId, std::vector<double>> combined;
    for (const CandidateId side : {a, b}) {
      const auto adjacent = neighbors[side];
      for (const CandidateId other : adjacent) {
        const RegionPair pair = ordered(side, other);
        if (other != a && other != b) {
          auto& values = combined[other];
          const auto& source = interfaces[pair];
          values.insert(values.end(), source.begin(), source.end());
        }
        remove_edge(pair);
      }
      neighbors.erase(side);
    }
    for (auto& [other, values] : combined) {
      const RegionPair pair = ordered(merged, other);
      interfaces[pair] = std::move(values);
      add_edge(pair);
    }
  }
  return tree;
}

std::vector<std::pair<CandidateId, int>> node_levels(const MergeTree& tree) {
  std::map<CandidateId, int> levels;
  for (auto label : tree.superpixels.data()) {
    if (label != 0) levels[label] = 0;
  }
  for (const auto& event : tree.events) {
    levels[event.new_id] = 1 + std::max(levels.at(event.child_a), levels.at(event.child_b));
  }
  return {levels.begin(), levels.end()};
}

Crag extract_candidates(const MergeTree& tree, int max_merges, std::optional<double> score_threshold) {
  if (max_merges < 0) throw Error(ErrorCode::InvalidArgument, "max_merges must be non-negative");
  const auto& sp = tree.superpixels;
  const int w = sp.width(), h = sp.height();

  std::map<CandidateId, std::vector<Pixel>> leaf_pixels;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (sp(r, c) != 0) leaf_pixels[sp(r, c)].push_back({r, c});
    }
  }

  std::map<CandidateId, int> level;
  std::map<CandidateId, bool> included;
  std::map<CandidateId, CandidateId> parent;
  for (const auto& [id, pixels] : leaf_pixels) {
    level[id] = 0;
    included[id] = true;
  }
  for (const auto& e : tree.events) {
    level[e.new_id] = 1 + std::max(level.at(e.child_a), level.at(e.child_b));
    included[e.new_id] = included.at(e.child_a) && included.at(e.child_b) &&
                         level[e.new_id] <= max_merges &&
                         (!score_threshold || e.score <= *score_threshold);
    parent[e.child_a] = e.new_id;
    parent[e.child_b] = e.new_id;
  }

  std::vector<CandidateSpec> candidates;
  for (const auto& [id, inc] : included) {
    if (!inc) continue;
    CandidateSpec spec{id, level[id], {}};
    if (auto it = leaf_pixels.find(id); it != leaf_pixels.end()) spec.pixels = it->second;
    candidates.push_back(std::move(spec));
  }
  std::vector<SubsetEdge> subset;
  for (const auto& [child, par] : parent) {
    if (included[child] && included[par]) subset.push_back({child, par});
  }

  // Included chain (leaf first) of every superpixel.
  std::map<CandidateId, std::vector<CandidateId>> chains;
  for (const auto& [id, pixels] : leaf_pixels) {
    auto& chain = chains[id];
    for (CandidateId k = id;;) {
      chain.push_back(k);
      auto it = parent.find(k);
      if (it == parent.end() || !included[it->second]) break;
      k = it->second;
    }
  }
  std::set<RegionPair> leaf_pairs;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const auto a = sp(r, c);
      if (a == 0) continue;
      if (c + 1 < w && sp(r, c + 1) != 0 && sp(r, c + 1) != a) leaf_pairs.insert(ordered(a, sp(r, c + 1)));
      if (r + 1 < h && sp(r + 1, c) != 0 && sp(r + 1, c) != a) leaf_pairs.insert(ordered(a, sp(r + 1, c)));
    }
  }
  std::set<EdgeKey> adjacency;
  for (const auto& [p, q] : leaf_pairs) {
    const auto& cp = chains[p];
    const auto& cq = chains[q];
    for (CandidateId u : cp) {
      // a node on both chains contains both leaves and overlaps everything on either chain
      if (std::find(cq.begin(), cq.end(), u) != cq.end()) break;
      for (CandidateId v : cq) {
        if (std::find(cp.begin(), cp.end(), v) != cp.end()) break;
        adjacency.insert(EdgeKey::of(u, v));
      }
    }
  }

  Image<std::uint8_t> cover(w, h, 0);
  for (std::size_t i = 0; i < sp.size(); ++i) cover.data()[i] = sp.data()[i] != 0;
  return Crag::build(std::move(candidates), {adjacency.begin(), adjacency.end()}, std::move(subset), w,
                     h, &cover);
}

}  // namespace cmc
