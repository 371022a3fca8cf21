#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "tracex/error.hpp"
#include "tracex/transport.hpp"

using namespace tracex;

namespace {

double solve(const std::vector<double>& a, const std::vector<double>& b, const std::vector<double>& c) {
  return solve_transport(a, b, CostMatrix{c, a.size(), b.size()}).cost;
}

}  // namespace

TEST(Transport, TwoByTwoHandCases) {
  const std::vector<double> half = {0.5, 0.5};
  EXPECT_NEAR(solve(half, half, {0, 1, 1, 0}), 0.0, 1e-12);
  EXPECT_NEAR(solve(half, half, {1, 0, 0, 1}), 0.0, 1e-12);
  EXPECT_NEAR(solve(half, half, {1, 1, 1, 3}), 1.0, 1e-12);
}

TEST(Transport, SingleRowOrColumn) {
  EXPECT_NEAR(solve({1.0}, {0.25, 0.75}, {4, 8}), 7.0, 1e-12);
  EXPECT_NEAR(solve({0.5, 0.5}, {1.0}, {2, 6}), 4.0, 1e-12);
}

TEST(Transport, PlanIsFeasible) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng() % 7, m = 1 + rng() % 7;
    std::vector<double> a(n), b(m), c(n * m);
    double ta = 0, tb = 0;
    for (auto& x : a) ta += (x = u(rng) + 0.01);
    for (auto& x : b) tb += (x = u(rng) + 0.01);
    for (auto& x : a) x /= ta;
    for (auto& x : b) x /= tb;
    for (auto& x : c) x = u(rng);
    const auto r = solve_transport(a, b, CostMatrix{c, n, m});
    std::vector<double> rows(n, 0.0), cols(m, 0.0);
    double cost = 0.0;
    for (const auto& cell : r.plan) {
      ASSERT_GE(cell.mass, -1e-12);
      rows[cell.row] += cell.mass;
      cols[cell.col] += cell.mass;
      cost += cell.mass * c[cell.row * m + cell.col];
    }
    for (std::size_t i = 0; i < n; ++i) ASSERT_NEAR(rows[i], a[i], 1e-9);
    for (std::size_t j = 0; j < m; ++j) ASSERT_NEAR(cols[j], b[j], 1e-9);
    ASSERT_NEAR(cost, r.cost, 1e-9);
  }
}

TEST(Transport, MatchesMinCostFlowOracle) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 1 + rng() % 5, m = 1 + rng() % 5;
    std::vector<long> ia(n), ib(m);
    for (auto& x : ia) x = 1 + static_cast<long>(rng() % 9);
    for (auto& x : ib) x = 1 + static_cast<long>(rng() % 9);
    long ta = 0, tb = 0;
    for (long x : ia) ta += x;
    for (long x : ib) tb += x;
    std::vector<double> a, b, c(n * m);
    for (long x : ia) a.push_back(static_cast<double>(x) / static_cast<double>(ta));
    for (long x : ib) b.push_back(static_cast<double>(x) / static_cast<double>(tb));
    for (auto& x : c) x = u(rng);
    ASSERT_NEAR(solve(a, b, c), oracle::normalized_transport(ia, ib, c), 1e-6) << "trial " << trial;
  }
}

TEST(Transport, RejectsBadInput) {
  const std::vector<double> c = {1, 2};
  try {
    solve({1.0}, {0.3, 0.3}, c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kConfig);
  }
  EXPECT_THROW(solve({1.0}, {-0.5, 1.5}, c), Error);
  EXPECT_THROW(solve({1.0}, {0.5, 0.5}, {1.0}), Error);
}
