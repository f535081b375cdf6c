#pragma once

#include <cstdint>
#include <vector>

#include "cmc/image.hpp"

namespace cmc {

struct SyntheticParams {
  int width = 128;
  int height = 128;
  int n_cells = 5;
  /// Standard deviation of the Gaussian noise added to raw and boundary, in [0,1].
  double noise_level = 0.1;
  std::uint64_t seed = 1;
  /// Straight internal membranes drawn across each cell in the boundary map.
  /// They oversegment cells without changing the ground truth.
  int chords_per_cell = 0;
  double chord_intensity = 0.7;
  double min_axis = 7.0;
  double max_axis = 16.0;
  double cell_intensity = 0.7;
  double background_intensity = 0.2;
  int placement_attempts = 2000;
};

struct SyntheticImage {
  RealImage raw;
  RealImage boundary;
  LabelImage gt;
};

/// Non-overlapping random ellipses: gt labels them 1..n_cells, raw is a flat
/// interior/background intensity plus noise, boundary is the blurred outline
/// (both sides of every ellipse border) plus noise, clamped to [0,1].
/// Deterministic per seed. Throws PlacementFailure if a cell cannot be
/// placed within the attempt budget.
std::vector<SyntheticImage> generate_synthetic(int n_images, const SyntheticParams& params);

}  // namespace cmc
