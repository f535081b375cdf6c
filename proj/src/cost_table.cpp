#include "cmc/cost_table.hpp"

#include <cmath>

#include "cmc/error.hpp"

namespace cmc {

void check_costs(const Crag& crag, const CostTable& costs) {
  if (costs.f.size() != crag.num_candidates() || costs.g.size() != crag.num_edges()) {
    throw Error(ErrorCode::KeyMismatch, "cost table does not match CRAG");
  }
  for (double v : costs.f) {
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "non-finite candidate cost");
  }
  for (double v : costs.g) {
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "non-finite edge cost");
  }
}

double objective(const CostTable& costs, const std::vector<std::uint8_t>& y,
                 const std::vector<std::uint8_t>& m) {
  double total = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i]) total += costs.f[i];
  }
  for (std::size_t e = 0; e < m.size(); ++e) {
    if (m[e]) total += costs.g[e];
  }
  return total;
}

}  // namespace cmc
