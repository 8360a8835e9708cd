#include <gtest/gtest.h>

#include <cmath>

#include "goalqvi/errors.hpp"
#include "goalqvi/intervention.hpp"
#include "goalqvi/qvi_solver.hpp"
#include "test_support.hpp"

using namespace goalqvi;

TEST(Solver, ValidateRejectsShortGrid) {
  SolverConfig cfg = small_config();
  cfg.grid = GridSpec(8.0, 40);
  EXPECT_THROW(validate(cfg), Error);
  cfg = small_config();
  cfg.dt = 0.03;
  try {
    validate(cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MisalignedStep);
  }
}

TEST(Solver, PdeStepSteadyStates) {
  SolverConfig cfg = small_config(20);
  const Slice zero(cfg.grid.size(), 0.0);
  for (double v : pde_step(zero, 2, cfg, false)) EXPECT_EQ(v, 0.0);
  // With Dirichlet data the corner value diffuses inward, monotonically.
  const Slice a = pde_step(zero, 2, cfg);
  const GridSpec& g = cfg.grid;
  EXPECT_DOUBLE_EQ(a[g.index(0, 0)], 1.2);
  for (int i = 0; i <= g.n(); ++i) {
    for (int j = 0; j <= g.n() - i; ++j) {
      EXPECT_GE(a[g.index(i, j)], 0.0);
      EXPECT_LE(a[g.index(i, j)], 1.2 + 1e-12);
      if (i + j == g.n()) EXPECT_EQ(a[g.index(i, j)], 0.0);
    }
  }
  const Slice c(cfg.grid.size(), 0.75);
  const Slice b = pde_step(c, 1, cfg, false);
  for (double v : b) EXPECT_NEAR(v, 0.75, 1e-13);
  cfg.market = {0.0, 0.0, 1e-300};
  const Slice rnd = [&] {
    Slice s(cfg.grid.size());
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = std::sin(static_cast<double>(i));
    return s;
  }();
  const Slice copy = pde_step(rnd, 1, cfg, false);
  for (std::size_t i = 0; i < copy.size(); ++i) EXPECT_NEAR(copy[i], rnd[i], 1e-14);
}

TEST(Solver, CflViolationWithPositiveRate) {
  SolverConfig cfg = small_config(40, 0.02, 0.5);
  cfg.schedule = GoalSchedule({{1.0, 3.0, 1.0}, {2.0, 6.0, 0.2}});
  cfg.market.r = 0.1;  // dt·r·n = 2 > 1
  const Slice zero(cfg.grid.size(), 0.0);
  try {
    static_cast<void>(pde_step(zero, 1, cfg));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::CflViolation);
  }
}

TEST(Solver, QviStepFromZeroIsBoundedSupersolution) {
  const SolverConfig cfg = small_config(20);
  const Level l = qvi_time_step(Slice(cfg.grid.size(), 0.0), 2, cfg);
  const InterventionSweep sweep(cfg.grid, cfg.cost);
  Slice m(cfg.grid.size());
  sweep.values(l.value, m);
  for (std::size_t node = 0; node < m.size(); ++node) {
    EXPECT_GE(l.value[node], 0.0);
    EXPECT_LE(l.value[node], 1.2 + 1e-12);
    EXPECT_LE(l.value[node], m[node] + 1e-6);
  }
  EXPECT_LE(l.residual, 1e-6);
  EXPECT_GE(l.iterations, 1);
}

TEST(Solver, TerminalConditionExamples) {
  const SolverConfig cfg = small_config(200);
  const Level t = terminal_condition(cfg);
  const GridSpec& g = cfg.grid;
  EXPECT_DOUBLE_EQ(t.value[g.index(0, 0)], 1.2);
  // Cash only: nothing to gain from trading, V = 0.2 (6 − x0)⁺.
  for (int i : {10, 60, 133, 140}) {
    EXPECT_NEAR(t.value[g.index(i, 0)], 0.2 * std::max(6.0 - i * g.dx(), 0.0), 1e-12) << i;
  }
  // Stock only: liquidation pays the fixed cost once.
  for (int j : {20, 100, 134, 180}) {
    const double x1 = j * g.dx();
    EXPECT_NEAR(t.value[g.index(0, j)], 0.2 * std::max(6.0 - (x1 - 0.02), 0.0), 1e-12) << j;
  }
}

TEST(Solver, FundingCandidatesAndTies) {
  const SolverConfig cfg = small_config(20);
  const Slice zero(cfg.grid.size(), 0.0);
  const Goal goal{1.0, 3.0, 1.0};
  const FundingChoice f = best_funding(zero, {5.0, 1.0}, goal, cfg.grid);
  EXPECT_DOUBLE_EQ(f.value, 0.0);
  EXPECT_DOUBLE_EQ(f.theta, 3.0);
  const FundingChoice none = best_funding(zero, {0.0, 2.0}, goal, cfg.grid);
  EXPECT_DOUBLE_EQ(none.theta, 0.0);
  EXPECT_DOUBLE_EQ(none.value, 3.0);
}

TEST(Solver, DeadlineCouplingCornerAndSandwich) {
  const SolverConfig cfg = small_config();
  const SolveResult& r = small_solution();
  const Level& post = r.level(2, 0);
  const DeadlineResult d = deadline_coupling(post.value, 1, cfg);
  const GridSpec& g = cfg.grid;
  EXPECT_NEAR(d.level.value[g.index(0, 0)], 4.2, 1e-12);
  EXPECT_EQ(d.theta[g.index(0, 0)], 0.0);
  for (std::size_t node = 0; node < g.size(); ++node) {
    EXPECT_LE(d.level.value[node], 3.0 + post.value[node] + 1e-12);
  }
  EXPECT_THROW(static_cast<void>(deadline_coupling(post.value, 2, cfg)), Error);
}

TEST(Solver, SolutionInvariants) {
  const SolverConfig cfg = small_config();
  const SolveResult& r = small_solution();
  const GridSpec& g = cfg.grid;
  EXPECT_EQ(r.segments.size(), 2u);
  EXPECT_EQ(r.segments[0].levels.size(), 21u);
  EXPECT_LE(r.max_residual(), 1e-6);
  const InterventionSweep sweep(g, cfg.cost);
  Slice m(g.size());
  for (std::size_t k = 1; k <= 2; ++k) {
    const double corner = k == 1 ? 4.2 : 1.2;
    for (const Level& l : r.segments[k - 1].levels) {
      EXPECT_NEAR(l.value[g.index(0, 0)], corner, 1e-10);
      sweep.values(l.value, m);
      for (int i = 0; i <= g.n(); ++i) {
        for (int j = 0; j <= g.n() - i; ++j) {
          const double v = l.value[g.index(i, j)];
          EXPECT_GE(v, -1e-9);
          EXPECT_LE(v, corner + 1e-9);
          EXPECT_LE(v, m[g.index(i, j)] + 1e-6);
          if (i + j == g.n()) EXPECT_LE(v, 1e-8);
          if (i + j < g.n()) {
            EXPECT_LE(l.value[g.index(i + 1, j)], v + 2e-8);
            EXPECT_LE(l.value[g.index(i, j + 1)], v + 2e-8);
          }
          const NodeAction& a = l.actions[g.index(i, j)];
          if (a.kind == Action::Trade) {
            const auto d = feasible_interval(g.node(i, j), cfg.cost);
            ASSERT_TRUE(d.has_value());
            EXPECT_TRUE(d->contains(a.delta, 1e-9));
          }
        }
      }
    }
  }
}

TEST(Solver, DeterministicAcrossThreadCounts) {
  SolverConfig one = small_config(30);
  SolverConfig four = small_config(30);
  four.threads = 4;
  const SolveResult a = solve(one);
  const SolveResult b = solve(four);
  for (std::size_t k = 0; k < 2; ++k) {
    for (std::size_t l = 0; l < a.segments[k].levels.size(); ++l) {
      EXPECT_EQ(a.segments[k].levels[l].value, b.segments[k].levels[l].value);
      EXPECT_EQ(a.segments[k].levels[l].actions, b.segments[k].levels[l].actions);
    }
  }
}

TEST(Solver, ProgressCallbackSeesEveryLevel) {
  int calls = 0;
  static_cast<void>(solve(small_config(20), [&](std::size_t, int) { ++calls; }));
  EXPECT_EQ(calls, 42);
}
