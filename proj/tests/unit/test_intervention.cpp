#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "goalqvi/intervention.hpp"

using namespace goalqvi;

namespace {

Slice random_slice(const GridSpec& g, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Slice s(g.size());
  for (double& v : s) v = u(gen);
  return s;
}

// Dense scan of D(x) as an independent reference for ℳ.
double brute_force(const Slice& s, PortfolioState x, const CostModel& c, const GridSpec& g) {
  const auto d = feasible_interval(x, c);
  if (!d) return kNoTradeValue;
  double best = kNoTradeValue;
  const int steps = 20000;
  for (int k = 0; k <= steps; ++k) {
    const double delta = d->lo + (d->hi - d->lo) * k / steps;
    PortfolioState y = rebalance(x, delta, c);
    y.x0 = std::max(y.x0, 0.0);
    best = std::min(best, interpolate(s, y, g));
  }
  return best;
}

}  // namespace

TEST(Intervention, EmptyFeasibleSetGivesInfinity) {
  const GridSpec g(1.0, 10);
  const Slice s(g.size(), 0.0);
  const InterventionResult r = intervention_value(s, {0.005, 0.005}, CostModel::fixed(0.02), g);
  EXPECT_TRUE(std::isinf(r.value));
  EXPECT_FALSE(r.delta.has_value());
}

TEST(Intervention, FullLiquidationImageWins) {
  const GridSpec g(2.0, 2);  // nodes at 0, 1, 2
  Slice s(g.size(), 1.0);
  const CostModel c = CostModel::fixed(0.5);
  // From (0, 2) full liquidation lands on (1.5, 0), between nodes (1,0) and (2,0).
  s[g.index(1, 0)] = 0.2;
  s[g.index(2, 0)] = 0.2;
  const InterventionResult r = intervention_value(s, {0.0, 2.0}, c, g);
  ASSERT_TRUE(r.delta.has_value());
  EXPECT_NEAR(*r.delta, -2.0, 1e-12);
  EXPECT_NEAR(r.value, 0.2, 1e-12);
}

TEST(Intervention, ZeroSurfaceTiesGoToSmallestTrade) {
  const GridSpec g(1.0, 10);
  const Slice s(g.size(), 0.0);
  const InterventionResult r = intervention_value(s, {0.5, 0.3}, CostModel::fixed(0.02), g);
  EXPECT_DOUBLE_EQ(r.value, 0.0);
  ASSERT_TRUE(r.delta.has_value());
  EXPECT_EQ(*r.delta, 0.0);
}

TEST(Intervention, MatchesDenseScanOnRowBreakSurfaces) {
  // V = α·i + b(j): along any trade line the interpolant is piecewise linear
  // with breaks only where x1 crosses a lattice row, so the dense-scan
  // minimum is attained at one of the candidates.
  const GridSpec g(2.0, 16);
  const Slice b = random_slice(g, 3);
  for (double alpha : {-0.05, 0.0, 0.08}) {
    Slice s(g.size());
    for (int i = 0; i <= g.n(); ++i) {
      for (int j = 0; j <= g.n() - i; ++j) s[g.index(i, j)] = alpha * i + b[static_cast<std::size_t>(j)];
    }
    const CostModel c = CostModel::fixed(0.05);
    for (const PortfolioState x : {PortfolioState{1.0, 0.5}, PortfolioState{0.3, 1.6}, PortfolioState{0.125, 0.0},
                                   PortfolioState{0.77, 0.91}}) {
      const InterventionResult r = intervention_value(s, x, c, g);
      const double dense = brute_force(s, x, c, g);
      EXPECT_LE(r.value, dense + 1e-12);
      EXPECT_GE(r.value, dense - 1e-3);
    }
  }
}

TEST(Intervention, FastSweepMatchesGenericPath) {
  const GridSpec g(3.0, 24);
  const Slice s = random_slice(g, 11);
  const CostModel c = CostModel::fixed(0.07);
  const InterventionSweep sweep(g, c);
  Slice fast(g.size());
  sweep.values(s, fast);
  for (int i = 0; i <= g.n(); ++i) {
    for (int j = 0; j <= g.n() - i; ++j) {
      const InterventionResult generic = intervention_value(s, g.node(i, j), c, g);
      const double v = fast[g.index(i, j)];
      if (std::isinf(generic.value)) {
        EXPECT_TRUE(std::isinf(v));
        continue;
      }
      EXPECT_NEAR(v, generic.value, 1e-12) << i << "," << j;
      const InterventionResult node = sweep.at_node(s, i, j);
      EXPECT_NEAR(node.value, generic.value, 1e-12);
      ASSERT_TRUE(node.delta.has_value());
      EXPECT_NEAR(interpolate(s, rebalance(g.node(i, j), *node.delta, c), g), node.value, 1e-12);
    }
  }
}

TEST(Intervention, ProportionalCostUsesGenericPath) {
  const GridSpec g(2.0, 10);
  const Slice s = random_slice(g, 5);
  const CostModel c = CostModel::fixed_plus_proportional(0.02, 0.05);
  const InterventionSweep sweep(g, c);
  Slice out(g.size());
  sweep.values(s, out);
  EXPECT_NEAR(out[g.index(4, 3)], intervention_value(s, g.node(4, 3), c, g).value, 1e-15);
}
