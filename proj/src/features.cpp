#include "cmc/features.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "cmc/error.hpp"

namespace cmc {

namespace {

const char* const kIntensityImages[] = {"raw", "boundary"};
const char* const kIntensityRegions[] = {"region", "contour"};

std::vector<std::string> make_node_schema() {
  std::vector<std::string> names{"size", "circularity", "eccentricity"};
  for (int b = 0; b < kAngleBins; ++b) names.push_back("contour_angle_hist_" + std::to_string(b));
  for (const char* image : kIntensityImages) {
    for (const char* region : kIntensityRegions) {
      const std::string prefix = std::string(image) + "_" + region + "_";
      for (const char* stat : {"sum", "mean", "variance", "skewness", "kurtosis"}) names.push_back(prefix + stat);
      for (int b = 0; b < kIntensityBins; ++b) names.push_back(prefix + "hist_" + std::to_string(b));
      for (double q : kQuantiles) names.push_back(prefix + "q" + std::to_string(static_cast<int>(std::lround(q * 100))));
    }
  }
  return names;
}

std::vector<std::string> make_edge_schema() {
  std::vector<std::string> names{"contact_area", "interface_mean", "interface_variance", "interface_skewness"};
  for (const auto& f : node_feature_schema()) {
    for (const char* op : {"absdiff", "min", "max", "sum"}) names.push_back(f + "_" + op);
  }
  return names;
}

// Region membership over the bounding box, padded by one pixel.
class RegionMask {
 public:
  explicit RegionMask(const std::vector<Pixel>& pixels) {
    int r0 = pixels.front().row, r1 = r0, c0 = pixels.front().col, c1 = c0;
    for (const Pixel p : pixels) {
      r0 = std::min(r0, p.row), r1 = std::max(r1, p.row);
      c0 = std::min(c0, p.col), c1 = std::max(c1, p.col);
    }
    origin_ = {r0 - 1, c0 - 1};
    mask_ = Image<std::uint8_t>(c1 - c0 + 3, r1 - r0 + 3, 0);
    for (const Pixel p : pixels) mask_(p.row - origin_.row, p.col - origin_.col) = 1;
  }

  bool operator()(Pixel p) const {
    const Pixel local{p.row - origin_.row, p.col - origin_.col};
    return mask_.contains(local) && mask_(local);
  }

 private:
  Pixel origin_;
  Image<std::uint8_t> mask_;
};

constexpr int kMooreRows[8] = {0, -1, -1, -1, 0, 1, 1, 1};  // W, NW, N, NE, E, SE, S, SW
constexpr int kMooreCols[8] = {-1, -1, 0, 1, 1, 1, 0, -1};

int moore_direction(Pixel from, Pixel to) {
  for (int d = 0; d < 8; ++d) {
    if (from.row + kMooreRows[d] == to.row && from.col + kMooreCols[d] == to.col) return d;
  }
  return -1;
}

int count_components8(const std::vector<Pixel>& pixels, const RegionMask& inside) {
  std::set<Pixel> unvisited(pixels.begin(), pixels.end());
  int components = 0;
  std::vector<Pixel> stack;
  while (!unvisited.empty()) {
    ++components;
    stack.push_back(*unvisited.begin());
    unvisited.erase(unvisited.begin());
    while (!stack.empty()) {
      const Pixel p = stack.back();
      stack.pop_back();
      for (int d = 0; d < 8; ++d) {
        const Pixel q{p.row + kMooreRows[d], p.col + kMooreCols[d]};
        if (!inside(q)) continue;
        auto it = unvisited.find(q);
        if (it == unvisited.end()) continue;
        unvisited.erase(it);
        stack.push_back(q);
      }
    }
  }
  return components;
}

void append_intensity_features(FeatureVector& out, const std::vector<double>& values) {
  const auto m = detail::moments(values);
  out.insert(out.end(), {m.sum, m.mean, m.variance, m.skewness, m.kurtosis});
  const auto hist = detail::histogram(values, kIntensityBins);
  out.insert(out.end(), hist.begin(), hist.end());
  auto sorted = values;
  std::sort(sorted.begin(), sorted.end());
  for (double q : kQuantiles) out.push_back(detail::quantile(sorted, q));
}

}  // namespace

const std::vector<std::string>& node_feature_schema() {
  static const std::vector<std::string> schema = make_node_schema();
  return schema;
}

const std::vector<std::string>& edge_feature_schema() {
  static const std::vector<std::string> schema = make_edge_schema();
  return schema;
}

namespace detail {

Moments moments(const std::vector<double>& values) {
  Moments m;
  if (values.empty()) return m;
  const double n = static_cast<double>(values.size());
  for (double v : values) m.sum += v;
  m.mean = m.sum / n;
  double m2 = 0, m3 = 0, m4 = 0;
  for (double v : values) {
    const double d = v - m.mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= n, m3 /= n, m4 /= n;
  m.variance = m2;
  // relative cutoff: rounding leaves tiny positive m2 for constant inputs
  if (m2 > 1e-24 * std::max(1.0, m.mean * m.mean)) {
    m.skewness = m3 / std::pow(m2, 1.5);
    m.kurtosis = m4 / (m2 * m2) - 3.0;
  } else {
    m.variance = 0.0;
  }
  return m;
}

double quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double position = q * static_cast<double>(sorted.size() - 1);
  const auto lower = static_cast<std::size_t>(std::floor(position));
  const std::size_t upper = std::min(lower + 1, sorted.size() - 1);
  const double t = position - static_cast<double>(lower);
  return sorted[lower] + t * (sorted[upper] - sorted[lower]);
}

std::vector<double> histogram(const std::vector<double>& values, int bins) {
  std::vector<double> counts(bins, 0.0);
  for (double v : values) {
    const int b = std::clamp(static_cast<int>(std::floor(v * bins)), 0, bins - 1);
    counts[b] += 1.0;
  }
  return counts;
}

std::vector<Pixel> trace_contour(const std::vector<Pixel>& pixels) {
  if (pixels.size() < 2) return {};
  const RegionMask inside(pixels);
  if (count_components8(pixels, inside) != 1) return {};

  const Pixel start = *std::min_element(pixels.begin(), pixels.end());
  // Clockwise scan around `p`, beginning after the outside neighbor at `back`.
  auto next = [&](Pixel p, int back, int& new_back) -> Pixel {
    for (int k = 1; k <= 8; ++k) {
      const int d = (back + k) % 8;
      const Pixel q{p.row + kMooreRows[d], p.col + kMooreCols[d]};
      if (inside(q)) {
        const int prev = (back + k - 1) % 8;
        const Pixel outside{p.row + kMooreRows[prev], p.col + kMooreCols[prev]};
        new_back = moore_direction(q, outside);
        return q;
      }
    }
    return p;
  };

  std::vector<Pixel> contour{start};
  int back = 0;  // west of the raster-first pixel is outside
  int new_back = 0;
  const Pixel first_step = next(start, back, new_back);
  Pixel current = first_step;
  back = new_back;
  const std::size_t limit = 8 * pixels.size() + 8;
  while (contour.size() <= limit) {
    contour.push_back(current);
    const Pixel following = next(current, back, new_back);
    if (current == start && following == first_step) break;
    current = following;
    back = new_back;
  }
  return contour;
}

}  // namespace detail

FeatureVector node_features(const std::vector<Pixel>& pixels, const RealImage& raw,
                            const BoundaryMap& boundary) {
  if (pixels.empty()) throw Error(ErrorCode::EmptyRegion, "candidate has no pixels");
  const RegionMask inside(pixels);
  FeatureVector out;
  out.reserve(node_feature_schema().size());

  const double area = static_cast<double>(pixels.size());
  std::size_t faces = 0;
  std::vector<Pixel> contour_pixels;
  for (const Pixel p : pixels) {
    int outside = 0;
    for (int k = 0; k < 4; ++k) {
      if (!inside({p.row + kRowOffsets4[k], p.col + kColOffsets4[k]})) ++outside;
    }
    faces += outside;
    if (outside > 0) contour_pixels.push_back(p);
  }
  const double perimeter = static_cast<double>(faces);
  out.push_back(area);
  out.push_back(4.0 * std::numbers::pi * area / (perimeter * perimeter));

  // coordinates relative to the bounding-box corner keep the result translation-exact
  int r0 = pixels.front().row, c0 = pixels.front().col;
  for (const Pixel p : pixels) r0 = std::min(r0, p.row), c0 = std::min(c0, p.col);
  double mean_r = 0, mean_c = 0;
  for (const Pixel p : pixels) mean_r += p.row - r0, mean_c += p.col - c0;
  mean_r /= area, mean_c /= area;
  double srr = 0, scc = 0, src = 0;
  for (const Pixel p : pixels) {
    const double dr = p.row - r0 - mean_r, dc = p.col - c0 - mean_c;
    srr += dr * dr, scc += dc * dc, src += dr * dc;
  }
  srr /= area, scc /= area, src /= area;
  const double half_trace = 0.5 * (srr + scc);
  const double radius = std::sqrt(0.25 * (srr - scc) * (srr - scc) + src * src);
  const double lambda_max = half_trace + radius, lambda_min = std::max(0.0, half_trace - radius);
  out.push_back(lambda_max > 0 ? std::sqrt(std::max(0.0, 1.0 - lambda_min / lambda_max)) : 0.0);

  std::vector<double> angle_hist(kAngleBins, 0.0);
  const auto contour = detail::trace_contour(pixels);
  for (std::size_t k = 1; k < contour.size(); ++k) {
    const double dr = contour[k].row - contour[k - 1].row;
    const double dc = contour[k].col - contour[k - 1].col;
    double angle = std::atan2(-dr, dc);
    if (angle < 0) angle += 2 * std::numbers::pi;
    const double bin_width = 2 * std::numbers::pi / kAngleBins;
    const int bin = std::clamp(static_cast<int>(std::floor(angle / bin_width + 1e-9)), 0, kAngleBins - 1);
    angle_hist[bin] += 1.0;
  }
  out.insert(out.end(), angle_hist.begin(), angle_hist.end());

  for (const RealImage* image : {&raw, &boundary}) {
    for (const std::vector<Pixel>* region : std::initializer_list<const std::vector<Pixel>*>{&pixels, &contour_pixels}) {
      std::vector<double> values;
      values.reserve(region->size());
      for (const Pixel p : *region) values.push_back((*image)(p));
      append_intensity_features(out, values);
    }
  }
  return out;
}

std::vector<double> edge_interface(int edge, const Crag& crag, const BoundaryMap& boundary) {
  if (edge < 0 || edge >= static_cast<int>(crag.num_edges())) {
    throw Error(ErrorCode::NotAnEdge, "edge index out of range");
  }
  auto [u, v] = crag.endpoints(edge);
  if (crag.size(u) > crag.size(v)) std::swap(u, v);
  std::vector<double> values;
  for (const Pixel p : crag.pixels(u)) {
    for (int k = 0; k < 4; ++k) {
      const Pixel q{p.row + kRowOffsets4[k], p.col + kColOffsets4[k]};
      if (crag.contains(v, q)) values.push_back(std::max(boundary(p), boundary(q)));
    }
  }
  return values;
}

FeatureVector edge_features(int edge, const Crag& crag, const BoundaryMap& boundary,
                            const FeatureVector& u_features, const FeatureVector& v_features) {
  if (u_features.size() != v_features.size()) {
    throw Error(ErrorCode::SchemaMismatch, "endpoint feature vectors differ in length");
  }
  const auto interface = edge_interface(edge, crag, boundary);
  const auto m = detail::moments(interface);
  FeatureVector out{static_cast<double>(interface.size()), m.mean, m.variance, m.skewness};
  out.reserve(4 + 4 * u_features.size());
  for (std::size_t k = 0; k < u_features.size(); ++k) {
    const double a = u_features[k], b = v_features[k];
    out.insert(out.end(), {std::abs(a - b), std::min(a, b), std::max(a, b), a + b});
  }
  return out;
}

FeatureSet compute_features(const Crag& crag, const RealImage& raw, const BoundaryMap& boundary) {
  if (raw.width() != crag.width() || raw.height() != crag.height() || boundary.width() != crag.width() ||
      boundary.height() != crag.height()) {
    throw Error(ErrorCode::DimensionMismatch, "images do not match CRAG dimensions");
  }
  FeatureSet set{node_feature_schema(), edge_feature_schema(), {}, {}};
  for (int i = 0; i < static_cast<int>(crag.num_candidates()); ++i) {
    set.nodes.push_back(node_features(crag.pixels(i), raw, boundary));
  }
  for (int e = 0; e < static_cast<int>(crag.num_edges()); ++e) {
    const auto [u, v] = crag.endpoints(e);
    set.edges.push_back(edge_features(e, crag, boundary, set.nodes[u], set.nodes[v]));
  }
  return set;
}

}  // namespace cmc
