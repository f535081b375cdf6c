#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "cmc/error.hpp"
#include "cmc/hierarchy.hpp"
#include "support.hpp"

using namespace cmc;
using namespace cmc::testing;

namespace {

RealImage real_image(const std::vector<std::vector<double>>& grid) {
  RealImage image(static_cast<int>(grid.front().size()), static_cast<int>(grid.size()));
  for (int r = 0; r < image.height(); ++r) {
    for (int c = 0; c < image.width(); ++c) image(r, c) = grid[r][c];
  }
  return image;
}

RealImage random_boundary(std::mt19937_64& rng, int w, int h) {
  std::uniform_int_distribution<int> level(0, 20);
  RealImage image(w, h);
  for (auto& v : image.data()) v = level(rng) / 20.0;
  return image;
}

std::vector<Pixel> pixels_of(const LabelImage& labels, CandidateId id) {
  std::vector<Pixel> out;
  for (int r = 0; r < labels.height(); ++r) {
    for (int c = 0; c < labels.width(); ++c) {
      if (labels(r, c) == id) out.push_back({r, c});
    }
  }
  return out;
}

// Layout "a b d / c c d" with boundary values making (a,b), then
// (c,d), then (e,f) the cheapest merges.
LabelImage abcd_superpixels() { return label_image({{A, B, D}, {C, C, D}}); }
RealImage abcd_boundary() { return real_image({{0.1, 0.1, 0.9}, {0.5, 0.3, 0.2}}); }

}  // namespace

TEST_CASE("watershed") {
  SUBCASE("constant zero map is one region") {
    const auto labels = seeded_watershed(RealImage(5, 4, 0.0), 0.5);
    CHECK(std::all_of(labels.data().begin(), labels.data().end(), [](auto v) { return v == 1; }));
  }
  SUBCASE("full-height barrier column") {
    RealImage boundary(4, 4, 0.0);
    for (int r = 0; r < 4; ++r) boundary(r, 2) = 1.0;
    const auto labels = seeded_watershed(boundary, 0.5);
    for (int r = 0; r < 4; ++r) {
      CHECK(labels(r, 0) == labels(r, 1));
      CHECK(labels(r, 2) == labels(r, 3));
      CHECK(labels(r, 1) != labels(r, 2));
      CHECK(labels(r, 0) == labels(0, 0));
      CHECK(labels(r, 3) == labels(0, 3));
    }
  }
  SUBCASE("no seeds") {
    try {
      seeded_watershed(RealImage(2, 2, 1.0), 0.5);
      FAIL("no error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::NoSeeds);
    }
  }
  SUBCASE("out-of-range boundary") {
    try {
      seeded_watershed(RealImage(2, 2, 1.5), 0.5);
      FAIL("no error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::InvalidBoundary);
    }
  }
}

TEST_CASE("property: watershed labels every pixel and keeps seeds intact") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const RealImage boundary = random_boundary(rng, 9, 7);
    if (*std::min_element(boundary.data().begin(), boundary.data().end()) >= 0.4) continue;
    const auto labels = seeded_watershed(boundary, 0.4);
    std::set<std::uint32_t> seen(labels.data().begin(), labels.data().end());
    CHECK(seen.count(0) == 0);
    CHECK(*seen.rbegin() == seen.size());
    // below-threshold neighbors always share a label
    for (int r = 0; r < 7; ++r) {
      for (int c = 0; c + 1 < 9; ++c) {
        if (boundary(r, c) < 0.4 && boundary(r, c + 1) < 0.4) CHECK(labels(r, c) == labels(r, c + 1));
      }
    }
    CHECK(seeded_watershed(boundary, 0.4) == labels);
  }
}

TEST_CASE("merge score") {
  CHECK(merge_score(3, 5, {0.2, 0.4, 0.6}) == doctest::Approx(1.2).epsilon(1e-12));
  CHECK(merge_score(2, 2, {0.1, 0.3}) == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(merge_score(4, 7, {0.0, 0.0, 0.0}) == 0.0);
  CHECK(median({5.0, 1.0, 3.0, 2.0}) == 2.5);

  const RealImage boundary = real_image({{0.1, 0.5}, {0.3, 0.2}});
  // a = {(0,0)}, b = {(0,1),(1,1)}: one interface pair, max(0.1,0.5)
  CHECK(merge_score({{0, 0}}, {{0, 1}, {1, 1}}, boundary) == doctest::Approx(0.5).epsilon(1e-12));
  try {
    merge_score({{0, 0}}, {{1, 1}}, boundary);
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotAdjacent);
  }
}

TEST_CASE("merge tree construction") {
  SUBCASE("single region") {
    CHECK(build_merge_tree(LabelImage(3, 3, 1), RealImage(3, 3, 0.2)).events.empty());
  }
  SUBCASE("lowest interface merges first") {
    // A | B | C, each 2x2; interface A-B at 0.1, B-C at 0.9
    const auto sp = label_image({{1, 1, 2, 2, 3, 3}, {1, 1, 2, 2, 3, 3}});
    const auto boundary = real_image({{0, 0.1, 0.1, 0.9, 0.9, 0}, {0, 0.1, 0.1, 0.9, 0.9, 0}});
    const auto tree = build_merge_tree(sp, boundary);
    REQUIRE(tree.events.size() == 2);
    CHECK(tree.events[0] == MergeEvent{1, 2, 4, 4 * 0.1});
    CHECK(tree.events[1].new_id == 5);
  }
  SUBCASE("abcd hierarchy") {
    const auto tree = build_merge_tree(abcd_superpixels(), abcd_boundary());
    REQUIRE(tree.events.size() == 3);
    CHECK(tree.events[0].child_a == A);
    CHECK(tree.events[0].child_b == B);
    CHECK(tree.events[0].new_id == E);
    CHECK(tree.events[1].child_a == C);
    CHECK(tree.events[1].child_b == D);
    CHECK(tree.events[1].new_id == F);
    CHECK(std::set<CandidateId>{tree.events[2].child_a, tree.events[2].child_b} == std::set<CandidateId>{E, F});
    CHECK(tree.events[2].new_id == G);
  }
  SUBCASE("equal scores break ties by smallest pair") {
    const auto sp = label_image({{1, 2, 3}});
    const auto tree = build_merge_tree(sp, RealImage(3, 1, 0.5));
    CHECK(tree.events[0].child_a == 1);
    CHECK(tree.events[0].child_b == 2);
  }
}

TEST_CASE("candidate extraction") {
  const auto tree = build_merge_tree(abcd_superpixels(), abcd_boundary());
  SUBCASE("max_merges 0 gives the superpixel adjacency graph") {
    const Crag crag = extract_candidates(tree, 0);
    CHECK(crag.ids() == std::vector<CandidateId>{A, B, C, D});
    CHECK(crag.edges() == crag_from_grid({{A, B, D}, {C, C, D}}, {}).edges());
  }
  SUBCASE("two merges include cross-level edges") {
    const Crag crag = extract_candidates(tree, 2);
    const Crag expected = abcd_crag();
    CHECK(crag.ids() == expected.ids());
    CHECK(crag.edges() == expected.edges());
    CHECK(crag.find_edge(EdgeKey::of(E, C)).has_value());
    CHECK(crag.level(crag.index_of(G)) == 2);
  }
  SUBCASE("score threshold excludes expensive merges and their ancestors") {
    const Crag crag = extract_candidates(tree, 5, 0.5);
    CHECK(crag.ids() == std::vector<CandidateId>{A, B, C, D, E});
  }
  SUBCASE("chain of 8 leaves with max_merges 5") {
    MergeTree chain;
    chain.superpixels = label_image({{1, 2, 3, 4, 5, 6, 7, 8}});
    CandidateId prev = 1;
    for (CandidateId leaf = 2; leaf <= 8; ++leaf) {
      const CandidateId id = 7 + leaf;
      chain.events.push_back({prev, leaf, id, 0.0});
      prev = id;
    }
    const Crag crag = extract_candidates(chain, 5);
    CHECK(crag.ids() == std::vector<CandidateId>{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13});
    for (const auto& [id, level] : node_levels(chain)) CHECK(level == (id <= 8 ? 0 : id - 8));
  }
}

TEST_CASE("property: merge tree replay, determinism and extraction") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 25; ++trial) {
    CAPTURE(trial);
    const RealImage boundary = random_boundary(rng, 10, 8);
    std::uniform_int_distribution<int> cell(1, 6);
    // 3x3 block superpixels, 12 regions
    LabelImage sp(10, 8, 0);
    for (int r = 0; r < 8; ++r) {
      for (int c = 0; c < 10; ++c) sp(r, c) = static_cast<std::uint32_t>((r / 3) * 4 + (c / 3) + 1);
    }
    const auto tree = build_merge_tree(sp, boundary);
    CHECK(build_merge_tree(sp, boundary).events == tree.events);
    const std::size_t k = std::set<std::uint32_t>(sp.data().begin(), sp.data().end()).size();
    REQUIRE(tree.events.size() == k - 1);

    // replay: each chosen score is minimal among live adjacent pairs
    std::map<CandidateId, std::vector<Pixel>> live;
    for (std::uint32_t id = 1; id <= k; ++id) live[id] = pixels_of(sp, id);
    for (const auto& event : tree.events) {
      double best = 1e300;
      std::pair<CandidateId, CandidateId> best_pair;
      for (auto i = live.begin(); i != live.end(); ++i) {
        for (auto j = std::next(i); j != live.end(); ++j) {
          if (interface_intensities(i->second, j->second, boundary).empty()) continue;
          const double s = merge_score(i->second, j->second, boundary);
          if (s < best) {
            best = s;
            best_pair = {i->first, j->first};
          }
        }
      }
      CHECK(event.score == doctest::Approx(best).epsilon(1e-12));
      CHECK(std::pair{event.child_a, event.child_b} == best_pair);
      auto merged = live.at(event.child_a);
      merged.insert(merged.end(), live.at(event.child_b).begin(), live.at(event.child_b).end());
      live.erase(event.child_a);
      live.erase(event.child_b);
      live[event.new_id] = merged;
    }

    // unlimited merges give 2K - 1 candidates
    CHECK(extract_candidates(tree, 1000).num_candidates() == 2 * k - 1);

    // extracted adjacency equals brute-force adjacency of the included candidates
    const int max_merges = cell(rng) % 4;
    const Crag crag = extract_candidates(tree, max_merges);
    std::map<CandidateId, std::set<Pixel>> pixels;
    for (std::size_t i = 0; i < crag.num_candidates(); ++i) {
      CHECK(crag.level(static_cast<int>(i)) <= max_merges);
      const auto px = crag.pixels(static_cast<int>(i));
      pixels[crag.id(static_cast<int>(i))] = {px.begin(), px.end()};
    }
    std::vector<EdgeKey> expected;
    for (auto i = pixels.begin(); i != pixels.end(); ++i) {
      for (auto j = std::next(i); j != pixels.end(); ++j) {
        bool disjoint = true, touching = false;
        for (const Pixel p : i->second) {
          disjoint = disjoint && !j->second.count(p);
          for (int d = 0; d < 4; ++d) touching = touching || j->second.count({p.row + kRowOffsets4[d], p.col + kColOffsets4[d]});
        }
        if (disjoint && touching) expected.push_back(EdgeKey::of(i->first, j->first));
      }
    }
    CHECK(crag.edges() == expected);
  }
}
