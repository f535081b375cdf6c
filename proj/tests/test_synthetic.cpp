#include <doctest.h>

#include <algorithm>
#include <set>

#include "cmc/error.hpp"
#include "cmc/hierarchy.hpp"
#include "cmc/synthetic.hpp"

using namespace cmc;

namespace {

bool near_outline(const LabelImage& gt, int r, int c, int radius) {
  for (int dr = -radius; dr <= radius; ++dr) {
    for (int dc = -radius; dc <= radius; ++dc) {
      const int rr = r + dr, cc = c + dc;
      if (!gt.contains(rr, cc)) continue;
      for (int k = 0; k < 4; ++k) {
        const int r2 = rr + kRowOffsets4[k], c2 = cc + kColOffsets4[k];
        if (gt.contains(r2, c2) && gt(r2, c2) != gt(rr, cc)) return true;
      }
    }
  }
  return false;
}

}  // namespace

TEST_CASE("no cells gives an all-background image") {
  SyntheticParams params;
  params.n_cells = 0;
  const auto images = generate_synthetic(2, params);
  REQUIRE(images.size() == 2);
  for (const auto& image : images) {
    CHECK(std::all_of(image.gt.data().begin(), image.gt.data().end(), [](auto v) { return v == 0; }));
    CHECK(image.gt.width() == 128);
    CHECK(image.gt.height() == 128);
  }
}

TEST_CASE("noise-free images") {
  SyntheticParams params;
  params.n_cells = 3;
  params.noise_level = 0.0;
  params.seed = 5;
  const auto image = generate_synthetic(1, params).front();
  const std::set<std::uint32_t> labels(image.gt.data().begin(), image.gt.data().end());
  CHECK(labels == std::set<std::uint32_t>{0, 1, 2, 3});
  for (int r = 0; r < 128; ++r) {
    for (int c = 0; c < 128; ++c) {
      // blur reaches one pixel beyond the outline
      if (!near_outline(image.gt, r, c, 1)) CHECK(image.boundary(r, c) == 0.0);
      CHECK(image.raw(r, c) == (image.gt(r, c) != 0 ? 0.7 : 0.2));
    }
  }
  const auto regions = seeded_watershed(image.boundary, 0.3);
  const std::set<std::uint32_t> found(regions.data().begin(), regions.data().end());
  CHECK(found.size() >= 3);
}

TEST_CASE("cells keep their gap") {
  SyntheticParams params;
  params.n_cells = 6;
  params.seed = 9;
  for (const auto& image : generate_synthetic(3, params)) {
    for (int r = 0; r < 128; ++r) {
      for (int c = 0; c < 128; ++c) {
        const auto a = image.gt(r, c);
        if (a == 0) continue;
        for (int dr = -2; dr <= 2; ++dr) {
          for (int dc = -2; dc <= 2; ++dc) {
            if (!image.gt.contains(r + dr, c + dc)) continue;
            const auto b = image.gt(r + dr, c + dc);
            CHECK((b == 0 || b == a));
          }
        }
      }
    }
    for (double v : image.boundary.data()) CHECK((v >= 0.0 && v <= 1.0));
    for (double v : image.raw.data()) CHECK((v >= 0.0 && v <= 1.0));
  }
}

TEST_CASE("determinism") {
  SyntheticParams params;
  params.seed = 123;
  params.chords_per_cell = 1;
  const auto a = generate_synthetic(2, params);
  const auto b = generate_synthetic(2, params);
  for (int i = 0; i < 2; ++i) {
    CHECK(a[i].raw == b[i].raw);
    CHECK(a[i].boundary == b[i].boundary);
    CHECK(a[i].gt == b[i].gt);
  }
  CHECK_FALSE(a[0].gt == a[1].gt);
  params.seed = 124;
  CHECK_FALSE(generate_synthetic(1, params)[0].gt == a[0].gt);
}

TEST_CASE("chords draw membranes inside cells") {
  SyntheticParams params;
  params.n_cells = 2;
  params.noise_level = 0.0;
  params.chords_per_cell = 2;
  const auto image = generate_synthetic(1, params).front();
  int membrane = 0;
  for (int r = 0; r < 128; ++r) {
    for (int c = 0; c < 128; ++c) {
      if (image.gt(r, c) != 0 && !near_outline(image.gt, r, c, 1) && image.boundary(r, c) == 0.7) ++membrane;
    }
  }
  CHECK(membrane > 0);
}

TEST_CASE("errors") {
  SyntheticParams crowded;
  crowded.width = crowded.height = 40;
  crowded.n_cells = 50;
  crowded.placement_attempts = 50;
  try {
    generate_synthetic(1, crowded);
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::PlacementFailure);
  }
  SyntheticParams noisy;
  noisy.noise_level = 1.5;
  try {
    generate_synthetic(1, noisy);
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidArgument);
  }
}
