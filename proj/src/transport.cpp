#include "tracex/transport.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tracex/error.hpp"

namespace tracex {

namespace {

// Spanning-tree basis over rows [0, m) and columns [m, m + n).
class TransportSimplex {
 public:
  TransportSimplex(std::vector<double> supply, std::vector<double> demand, std::vector<double> cost)
      : m_(supply.size()), n_(demand.size()), supply_(std::move(supply)), demand_(std::move(demand)),
        cost_(std::move(cost)) {
    double cmax = 0.0;
    for (double c : cost_) cmax = std::max(cmax, std::abs(c));
    eps_ = 1e-12 * (1.0 + cmax);
  }

  TransportResult solve() {
    northwest_corner();
    const std::size_t cells = m_ * n_;
    const std::size_t block = std::max<std::size_t>(10, static_cast<std::size_t>(std::sqrt(static_cast<double>(cells))));
    const std::size_t max_pivots = 1000000;
    std::size_t cursor = 0;
    std::size_t pivots = 0;
    while (true) {
      rebuild_tree();
      std::size_t entering = cells;
      double best = -eps_;
      std::size_t scanned = 0;
      while (scanned < cells) {
        const std::size_t stop = std::min(cells, scanned + block);
        for (; scanned < stop; ++scanned) {
          const std::size_t k = cursor;
          cursor = cursor + 1 == cells ? 0 : cursor + 1;
          const std::size_t i = k / n_, j = k % n_;
          const double r = cost_[k] - u_[i] - v_[j];
          if (r < best) {
            best = r;
            entering = k;
          }
        }
        if (entering != cells) break;
      }
      if (entering == cells) break;
      if (++pivots > max_pivots) throw NumericError("transport simplex exceeded its pivot budget");
      pivot(entering / n_, entering % n_);
    }

    TransportResult result;
    result.pivots = pivots;
    for (const auto& e : basis_) {
      result.cost += e.mass * cost_[e.row * n_ + e.col];
      result.plan.push_back(e);
    }
    return result;
  }

 private:
  using Cell = TransportResult::Cell;

  void northwest_corner() {
    auto rs = supply_;
    auto rd = demand_;
    std::size_t i = 0, j = 0;
    while (true) {
      const double x = std::min(rs[i], rd[j]);
      basis_.push_back({i, j, std::max(x, 0.0)});
      rs[i] -= x;
      rd[j] -= x;
      if (i == m_ - 1 && j == n_ - 1) break;
      if (i == m_ - 1) ++j;
      else if (j == n_ - 1) ++i;
      else if (rs[i] <= rd[j]) ++i;
      else ++j;
    }
  }

  std::size_t col_node(std::size_t j) const { return m_ + j; }

  void rebuild_tree() {
    const std::size_t nodes = m_ + n_;
    adj_.assign(nodes, {});
    for (std::size_t e = 0; e < basis_.size(); ++e) {
      adj_[basis_[e].row].push_back(e);
      adj_[col_node(basis_[e].col)].push_back(e);
    }
    parent_edge_.assign(nodes, kNone);
    depth_.assign(nodes, 0);
    u_.assign(m_, 0.0);
    v_.assign(n_, 0.0);
    std::vector<bool> seen(nodes, false);
    std::vector<std::size_t> queue{0};
    seen[0] = true;
    for (std::size_t q = 0; q < queue.size(); ++q) {
      const std::size_t node = queue[q];
      for (auto e : adj_[node]) {
        const auto& c = basis_[e];
        const bool from_row = node < m_;
        const std::size_t other = from_row ? col_node(c.col) : c.row;
        if (seen[other]) continue;
        seen[other] = true;
        parent_edge_[other] = e;
        depth_[other] = depth_[node] + 1;
        if (from_row) v_[c.col] = cost_[c.row * n_ + c.col] - u_[c.row];
        else u_[c.row] = cost_[c.row * n_ + c.col] - v_[c.col];
        queue.push_back(other);
      }
    }
    if (queue.size() != nodes) throw NumericError("transport basis is not a spanning tree");
  }

  std::size_t parent_of(std::size_t node) const {
    const auto& c = basis_[parent_edge_[node]];
    return node < m_ ? col_node(c.col) : c.row;
  }

  void pivot(std::size_t row, std::size_t col) {
    // Tree path from the entering column back to the entering row.
    std::vector<std::size_t> from_col, from_row;
    std::size_t a = col_node(col), b = row;
    while (depth_[a] > depth_[b]) {
      from_col.push_back(parent_edge_[a]);
      a = parent_of(a);
    }
    while (depth_[b] > depth_[a]) {
      from_row.push_back(parent_edge_[b]);
      b = parent_of(b);
    }
    while (a != b) {
      from_col.push_back(parent_edge_[a]);
      a = parent_of(a);
      from_row.push_back(parent_edge_[b]);
      b = parent_of(b);
    }
    std::vector<std::size_t> cycle = std::move(from_col);
    cycle.insert(cycle.end(), from_row.rbegin(), from_row.rend());

    // Edges at even positions lose mass, odd positions gain it.
    std::size_t leaving = kNone;
    double theta = 0.0;
    for (std::size_t k = 0; k < cycle.size(); k += 2) {
      const double x = basis_[cycle[k]].mass;
      if (leaving == kNone || x < theta) {
        theta = x;
        leaving = cycle[k];
      }
    }
    theta = std::max(theta, 0.0);
    for (std::size_t k = 0; k < cycle.size(); ++k) {
      auto& x = basis_[cycle[k]].mass;
      x = k % 2 == 0 ? std::max(x - theta, 0.0) : x + theta;
    }
    basis_[leaving] = Cell{row, col, theta};
  }

  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  std::size_t m_, n_;
  std::vector<double> supply_, demand_, cost_;
  double eps_ = 0.0;
  std::vector<Cell> basis_;
  std::vector<std::vector<std::size_t>> adj_;
  std::vector<std::size_t> parent_edge_, depth_;
  std::vector<double> u_, v_;
};

}  // namespace

TransportResult solve_transport(std::span<const double> supply, std::span<const double> demand,
                                const CostMatrix& cost) {
  if (cost.rows != supply.size() || cost.cols != demand.size() || cost.values.size() != cost.rows * cost.cols) {
    throw ConfigError("transport cost matrix shape does not match supply/demand sizes");
  }
  double total_s = 0.0, total_d = 0.0;
  for (double s : supply) {
    if (!(s >= 0.0)) throw ConfigError("transport supplies must be non-negative");
    total_s += s;
  }
  for (double d : demand) {
    if (!(d >= 0.0)) throw ConfigError("transport demands must be non-negative");
    total_d += d;
  }
  if (std::abs(total_s - total_d) > 1e-9 * std::max(1.0, std::max(total_s, total_d))) {
    throw ConfigError("transport supply and demand totals differ");
  }

  // Zero-weight rows and columns carry no mass; solve on the positive support.
  std::vector<std::size_t> rows, cols;
  for (std::size_t i = 0; i < supply.size(); ++i)
    if (supply[i] > 0.0) rows.push_back(i);
  for (std::size_t j = 0; j < demand.size(); ++j)
    if (demand[j] > 0.0) cols.push_back(j);
  if (rows.empty() || cols.empty()) return {};

  std::vector<double> s(rows.size()), d(cols.size()), c(rows.size() * cols.size());
  for (std::size_t a = 0; a < rows.size(); ++a) s[a] = supply[rows[a]];
  const double scale = total_s / total_d;
  for (std::size_t b = 0; b < cols.size(); ++b) d[b] = demand[cols[b]] * scale;
  for (std::size_t a = 0; a < rows.size(); ++a)
    for (std::size_t b = 0; b < cols.size(); ++b) c[a * cols.size() + b] = cost(rows[a], cols[b]);

  auto result = TransportSimplex(std::move(s), std::move(d), std::move(c)).solve();
  for (auto& cell : result.plan) {
    cell.row = rows[cell.row];
    cell.col = cols[cell.col];
  }
  return result;
}

}  // namespace tracex
