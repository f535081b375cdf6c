#include "cmc/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "cmc/error.hpp"

namespace cmc {

namespace {

struct Ellipse {
  double row, col, a, b, angle;

  bool contains(double r, double c) const {
    const double dr = r - row, dc = c - col;
    const double u = dc * std::cos(angle) + dr * std::sin(angle);
    const double v = -dc * std::sin(angle) + dr * std::cos(angle);
    return (u * u) / (a * a) + (v * v) / (b * b) <= 1.0;
  }
};

RealImage blur3(const RealImage& in) {
  static constexpr double kKernel[3] = {0.25, 0.5, 0.25};
  RealImage tmp(in.width(), in.height(), 0.0), out(in.width(), in.height(), 0.0);
  for (int r = 0; r < in.height(); ++r) {
    for (int c = 0; c < in.width(); ++c) {
      double s = 0;
      for (int k = -1; k <= 1; ++k) {
        if (in.contains(r, c + k)) s += kKernel[k + 1] * in(r, c + k);
      }
      tmp(r, c) = s;
    }
  }
  for (int r = 0; r < in.height(); ++r) {
    for (int c = 0; c < in.width(); ++c) {
      double s = 0;
      for (int k = -1; k <= 1; ++k) {
        if (in.contains(r + k, c)) s += kKernel[k + 1] * tmp(r + k, c);
      }
      out(r, c) = s;
    }
  }
  return out;
}

SyntheticImage generate_one(const SyntheticParams& p, std::mt19937_64& rng) {
  SyntheticImage image{RealImage(p.width, p.height, 0.0), RealImage(p.width, p.height, 0.0),
                       LabelImage(p.width, p.height, 0)};
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<Ellipse> cells;
  for (int k = 0; k < p.n_cells; ++k) {
    bool placed = false;
    for (int attempt = 0; attempt < p.placement_attempts && !placed; ++attempt) {
      Ellipse e{0, 0, p.min_axis + (p.max_axis - p.min_axis) * unit(rng),
                p.min_axis + (p.max_axis - p.min_axis) * unit(rng), std::numbers::pi * unit(rng)};
      const double reach = std::max(e.a, e.b) + 2.0;
      if (2 * reach >= std::min(p.width, p.height)) continue;
      e.row = reach + (p.height - 2 * reach) * unit(rng);
      e.col = reach + (p.width - 2 * reach) * unit(rng);
      // keep a 3-pixel gap to earlier cells
      bool clear = true;
      for (int r = 0; r < p.height && clear; ++r) {
        for (int c = 0; c < p.width && clear; ++c) {
          if (image.gt(r, c) == 0) continue;
          const Ellipse grown{e.row, e.col, e.a + 3.0, e.b + 3.0, e.angle};
          if (grown.contains(r, c)) clear = false;
        }
      }
      if (!clear) continue;
      for (int r = 0; r < p.height; ++r) {
        for (int c = 0; c < p.width; ++c) {
          if (e.contains(r, c)) image.gt(r, c) = static_cast<std::uint32_t>(k + 1);
        }
      }
      cells.push_back(e);
      placed = true;
    }
    if (!placed) {
      throw Error(ErrorCode::PlacementFailure, "could not place cell " + std::to_string(k + 1));
    }
  }

  RealImage outline(p.width, p.height, 0.0);
  for (int r = 0; r < p.height; ++r) {
    for (int c = 0; c < p.width; ++c) {
      for (int k = 0; k < 4; ++k) {
        const int rr = r + kRowOffsets4[k], cc = c + kColOffsets4[k];
        if (image.gt.contains(rr, cc) && image.gt(rr, cc) != image.gt(r, c)) outline(r, c) = 1.0;
      }
    }
  }
  for (std::size_t k = 0; k < cells.size(); ++k) {
    const auto label = static_cast<std::uint32_t>(k + 1);
    for (int chord = 0; chord < p.chords_per_cell; ++chord) {
      // line through a point near the center, random direction
      const double theta = std::numbers::pi * unit(rng);
      const double offset = (unit(rng) - 0.5) * std::min(cells[k].a, cells[k].b);
      const double nr = std::cos(theta), nc = std::sin(theta);
      for (int r = 0; r < p.height; ++r) {
        for (int c = 0; c < p.width; ++c) {
          if (image.gt(r, c) != label) continue;
          const double distance = (r - cells[k].row) * nr + (c - cells[k].col) * nc - offset;
          if (std::abs(distance) <= 0.5) outline(r, c) = std::max(outline(r, c), p.chord_intensity);
        }
      }
    }
  }
  RealImage blurred = blur3(outline);
  for (int r = 0; r < p.height; ++r) {
    for (int c = 0; c < p.width; ++c) {
      // keep the outline itself at full strength
      const double base = std::max(blurred(r, c), outline(r, c));
      image.boundary(r, c) = std::clamp(base + p.noise_level * gauss(rng), 0.0, 1.0);
      const double level = image.gt(r, c) != 0 ? p.cell_intensity : p.background_intensity;
      image.raw(r, c) = std::clamp(level + p.noise_level * gauss(rng), 0.0, 1.0);
    }
  }
  return image;
}

}  // namespace

std::vector<SyntheticImage> generate_synthetic(int n_images, const SyntheticParams& params) {
  if (n_images < 0 || params.n_cells < 0 || params.chords_per_cell < 0) {
    throw Error(ErrorCode::InvalidArgument, "counts must be non-negative");
  }
  if (!(params.noise_level >= 0.0 && params.noise_level <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "noise_level must lie in [0,1]");
  }
  if (params.width <= 0 || params.height <= 0 || params.min_axis <= 0 || params.max_axis < params.min_axis) {
    throw Error(ErrorCode::InvalidArgument, "invalid canvas or axis range");
  }
  std::mt19937_64 rng(params.seed);
  std::vector<SyntheticImage> images;
  for (int i = 0; i < n_images; ++i) images.push_back(generate_one(params, rng));
  return images;
}

}  // namespace cmc
