#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "goalqvi/errors.hpp"
#include "goalqvi/policy.hpp"
#include "test_support.hpp"

using namespace goalqvi;

TEST(Policy, LocateLevel) {
  const SolveResult& r = small_solution();
  LevelRef a = locate_level(r, 0.0);
  EXPECT_EQ(a.k, 1u);
  EXPECT_EQ(a.level, 0);
  a = locate_level(r, 1.0);  // interior deadline: pre-funding surface
  EXPECT_EQ(a.k, 1u);
  EXPECT_EQ(a.level, 20);
  a = locate_level(r, 1.05);
  EXPECT_EQ(a.k, 2u);
  EXPECT_EQ(a.level, 1);
  a = locate_level(r, 2.0);
  EXPECT_EQ(a.k, 2u);
  EXPECT_EQ(a.level, 20);
  try {
    static_cast<void>(locate_level(r, 0.52));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownTimeLevel);
  }
  a = nearest_level(r, 0.52);
  EXPECT_EQ(a.level, 10);
  EXPECT_EQ(nearest_level(r, 7.0).k, 2u);
}

TEST(Policy, RegionMapMatchesSolverActions) {
  const SolveResult& r = small_solution();
  const RegionMap map = classify_regions(r, 0.0);
  const GridSpec& g = map.grid;
  const Level& l = r.level(1, 0);
  for (int i = 0; i <= g.n(); ++i) {
    for (int j = 0; j <= g.n() - i; ++j) {
      const RegionCell& c = map.cells[g.index(i, j)];
      const NodeAction& a = l.actions[g.index(i, j)];
      if (a.kind == Action::Hold) {
        EXPECT_EQ(c.label, RegionLabel::Continue);
        continue;
      }
      EXPECT_EQ(c.label, a.delta > 0 ? RegionLabel::Buy : RegionLabel::Sell);
      const PortfolioState y = rebalance(g.node(i, j), a.delta, r.config.cost);
      EXPECT_NEAR(c.target.x0, std::max(y.x0, 0.0), 1e-9);
      EXPECT_NEAR(c.target.x1, y.x1, 1e-9);
    }
  }
  EXPECT_EQ(map.cells[g.index(0, 0)].label, RegionLabel::Continue);
  EXPECT_EQ(to_string(RegionLabel::Sell), "sell");
}

TEST(Policy, TargetPointsDeduplicated) {
  RegionMap map{{1, 0}, 0.0, GridSpec(1.0, 10), {}};
  map.cells.resize(map.grid.size());
  map.cells[0] = {RegionLabel::Buy, 0.1, {0.3, 0.2 + 1e-11}};
  map.cells[1] = {RegionLabel::Buy, 0.1, {0.3, 0.2}};
  map.cells[2] = {RegionLabel::Sell, -0.1, {0.1, 0.0}};
  map.cells[3] = {RegionLabel::Continue, 0.0, {0.05, 0.05}};
  const auto pts = target_points(map);
  ASSERT_EQ(pts.size(), 2u);
  EXPECT_DOUBLE_EQ(pts[0].x0, 0.1);
  EXPECT_DOUBLE_EQ(pts[1].x1, 0.2);
  std::ostringstream os;
  write_regions_csv(os, map);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "x0,x1,label,delta_star,target_x0,target_x1");
  EXPECT_NE(os.str().find(",continue,0,,\n"), std::string::npos);
}

TEST(Policy, AllStockToCashIsOneTrade) {
  // Γ((0, 9.02), −9.02) = (9.0, 0) with C = 0.02.
  const PortfolioState y = rebalance({0.0, 9.02}, -9.02, CostModel::fixed(0.02));
  EXPECT_NEAR(y.x0, 9.0, 1e-12);
  EXPECT_DOUBLE_EQ(y.x1, 0.0);
}

TEST(Policy, FundingRuleExamples) {
  const SolveResult& r = small_solution();
  EXPECT_DOUBLE_EQ(funding_rule(r, 1, {0.0, 0.0}), 0.0);
  EXPECT_DOUBLE_EQ(funding_rule(r, 1, {0.0, 5.0}), 0.0);
  EXPECT_NEAR(funding_rule(r, 1, {5.0, 0.0}), 3.0, r.config.grid.dx());
  EXPECT_NEAR(funding_rule(r, 1, {2.0, 1.0}), 2.0, r.config.grid.dx());
  EXPECT_DOUBLE_EQ(funding_rule(r, 1, {10.0, 1.0}), 3.0);  // above the grid
  EXPECT_THROW(static_cast<void>(funding_rule(r, 2, {1.0, 1.0})), Error);
}

TEST(Policy, ActionsAtAndBetweenDeadlines) {
  const SolveResult& r = small_solution();
  const Policy p(r);
  EXPECT_EQ(p.action(0.3, {0.0, 0.0}).kind, PolicyAction::Kind::Hold);
  EXPECT_THROW(static_cast<void>(p.action(0.3, {-1.0, 0.0})), Error);
  // Above the grid: sell the stock once, then hold cash.
  const PolicyAction sell = p.action(0.3, {8.0, 4.0});
  EXPECT_EQ(sell.kind, PolicyAction::Kind::Trade);
  EXPECT_DOUBLE_EQ(sell.amount, -4.0);
  EXPECT_EQ(p.action(0.3, {11.98, 0.0}).kind, PolicyAction::Kind::Hold);
  // Last deadline, nothing left to trade: fund with the liquidation value.
  const PolicyAction fund = p.action(2.0, {1.0, 0.0});
  EXPECT_EQ(fund.kind, PolicyAction::Kind::Fund);
  EXPECT_DOUBLE_EQ(fund.amount, 1.0);
  const PolicyAction cash = p.action(1.0, {0.0, 0.0});
  EXPECT_EQ(cash.kind, PolicyAction::Kind::Fund);
  EXPECT_DOUBLE_EQ(cash.amount, 0.0);
}

TEST(Policy, TradeSizeStaysFeasible) {
  const SolveResult& r = small_solution();
  const Policy p(r);
  for (double x0 = 0.05; x0 < 8.5; x0 += 0.37) {
    for (double x1 = 0.05; x0 + x1 < 8.9; x1 += 0.41) {
      const PolicyAction a = p.trade({1, 0}, {x0, x1});
      if (a.kind != PolicyAction::Kind::Trade) continue;
      const auto d = feasible_interval({x0, x1}, r.config.cost);
      ASSERT_TRUE(d.has_value());
      EXPECT_TRUE(d->contains(a.amount, 1e-9));
    }
  }
}
