#pragma once

// Exact discrete optimal transport between two weight vectors of equal mass,
// solved with a transportation (bipartite network) simplex.

#include <cstddef>
#include <span>
#include <vector>

namespace tracex {

struct TransportResult {
  double cost = 0.0;
  /// Basic cells of the optimal plan as (row, col, mass); zero-mass basic
  /// cells from degenerate pivots are included.
  struct Cell {
    std::size_t row, col;
    double mass;
  };
  std::vector<Cell> plan;
  std::size_t pivots = 0;
};

/// Row-major cost matrix view.
struct CostMatrix {
  std::span<const double> values;
  std::size_t rows = 0;
  std::size_t cols = 0;
  double operator()(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
};

/// Minimizes sum c_ij x_ij subject to row sums = supply, column sums = demand,
/// x >= 0. Supplies and demands must be non-negative; their totals must agree
/// to 1e-9 relative (the demand side is rescaled to match exactly).
TransportResult solve_transport(std::span<const double> supply, std::span<const double> demand,
                                const CostMatrix& cost);

}  // namespace tracex
