#include "goalqvi/qvi_solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "goalqvi/errors.hpp"
#include "goalqvi/parallel.hpp"

namespace goalqvi {
namespace {

// Trade classification slack, in units of penalty_tol.
constexpr double kActionSlack = 10.0;

bool is_dirichlet(const GridSpec& grid, int i, int j) { return i + j == grid.n() || (i == 0 && j == 0); }

// Explicit upwind step for the r·x0·V_x0 term.
Slice transport_x0(std::span<const double> next, const SolverConfig& cfg) {
  const GridSpec& grid = cfg.grid;
  Slice out(next.begin(), next.end());
  const double r = cfg.market.r;
  if (r == 0.0) return out;
  const int n = grid.n();
  if (cfg.dt * std::abs(r) * n > 1.0) {
    throw Error(ErrorCode::CflViolation, "explicit x0 step needs dt <= dx/(|r| w_max) = " +
                                             std::to_string(grid.dx() / (std::abs(r) * grid.w_max())));
  }
  for (int i = 0; i <= n; ++i) {
    for (int j = 0; j < n - i; ++j) {
      const double here = next[grid.index(i, j)];
      const double slope = r > 0.0 ? next[grid.index(i + 1, j)] - here
                                   : (i > 0 ? here - next[grid.index(i - 1, j)] : 0.0);
      out[grid.index(i, j)] = here + cfg.dt * r * i * slope;
    }
  }
  return out;
}

// Implicit x1 solve, row by row (fixed x0), with an optional nodewise
// penalty: (I − dt·A + P) V = rhs + P·target.
void solve_rows(const SolverConfig& cfg, std::size_t k, std::span<const double> rhs,
                std::span<const double> penalty, std::span<const double> target, bool dirichlet,
                std::span<double> out) {
  const GridSpec& grid = cfg.grid;
  const int n = grid.n();
  const double dt = cfg.dt;
  const double half_var = 0.5 * cfg.market.sigma * cfg.market.sigma;
  const double mu_up = std::max(cfg.market.mu, 0.0);
  const double mu_down = std::max(-cfg.market.mu, 0.0);
  const double corner = residual_weighted_targets(cfg.schedule, k);

  parallel_for(0, static_cast<std::size_t>(n) + 1, cfg.threads, [&](std::size_t iidx) {
    const int i = static_cast<int>(iidx);
    const int last = n - i;
    const std::size_t base = grid.offset(i);
    thread_local std::vector<double> lower, diag, upper, b;
    lower.assign(last + 1, 0.0);
    diag.assign(last + 1, 1.0);
    upper.assign(last + 1, 0.0);
    b.assign(last + 1, 0.0);

    for (int j = 0; j <= last; ++j) {
      const std::size_t node = base + j;
      const bool fixed = dirichlet && is_dirichlet(grid, i, j);
      if (fixed) {
        b[j] = (i == 0 && j == 0) ? corner : 0.0;
        continue;
      }
      const double pen = penalty.empty() ? 0.0 : penalty[node];
      b[j] = rhs[node] + (pen > 0.0 ? pen * target[node] : 0.0);
      diag[j] = 1.0 + pen;
      if (j == 0 || j == last) continue;  // x1 = 0 has no x1 dynamics; the undamped top node is frozen
      const double jj = static_cast<double>(j);
      const double diffusion = dt * half_var * jj * jj;
      lower[j] = -(diffusion + dt * mu_down * jj);
      upper[j] = -(diffusion + dt * mu_up * jj);
      diag[j] += 2.0 * diffusion + dt * (mu_up + mu_down) * jj;
    }

    // Thomas sweep.
    for (int j = 1; j <= last; ++j) {
      const double m = lower[j] / diag[j - 1];
      diag[j] -= m * upper[j - 1];
      b[j] -= m * b[j - 1];
    }
    out[base + last] = b[last] / diag[last];
    for (int j = last - 1; j >= 0; --j) {
      out[base + j] = (b[j] - upper[j] * out[base + j + 1]) / diag[j];
    }
  });
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

double residual_of(std::span<const double> v, std::span<const double> m) {
  double r = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (std::isfinite(m[i])) r = std::max(r, v[i] - m[i]);
  }
  return r;
}

int count_chained(const GridSpec& grid, const CostModel& cost, const std::vector<NodeAction>& actions) {
  int chained = 0;
  for (int i = 0; i <= grid.n(); ++i) {
    for (int j = 0; j <= grid.n() - i; ++j) {
      const NodeAction& a = actions[grid.index(i, j)];
      if (a.kind != Action::Trade) continue;
      const auto [ti, tj] = grid.nearest_node(rebalance(grid.node(i, j), a.delta, cost));
      if (actions[grid.index(ti, tj)].kind == Action::Trade) ++chained;
    }
  }
  return chained;
}

// Fixed point of V ← min(U, ℳ[V]) used at the deadlines and at T_K. Each
// effective trade burns at least c_min, so chains are bounded by w_max/c_min.
// The corner and the hypotenuse keep their Dirichlet values.
Level intervention_fixed_point(Slice payoff, double corner, const SolverConfig& cfg) {
  const GridSpec& grid = cfg.grid;
  const InterventionSweep sweep(grid, cfg.cost, cfg.threads);
  const auto pin = [&](Slice& v) {
    v[grid.index(0, 0)] = corner;
    for (int i = 0; i <= grid.n(); ++i) v[grid.index(i, grid.n() - i)] = 0.0;
  };

  Level level;
  level.value = payoff;
  pin(level.value);
  Slice m(grid.size());
  const int bound = static_cast<int>(std::ceil(grid.w_max() / cfg.cost.c_min())) + 2;
  bool converged = false;
  Slice next(grid.size());
  for (int it = 1; it <= bound; ++it) {
    sweep.values(level.value, m);
    for (std::size_t node = 0; node < m.size(); ++node) next[node] = std::min(payoff[node], m[node]);
    pin(next);
    const double change = max_abs_diff(next, level.value);
    level.value.swap(next);
    level.iterations = it;
    if (change <= cfg.penalty_tol) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw Error(ErrorCode::NonConvergence, "intervention fixed point did not settle within " +
                                               std::to_string(bound) + " sweeps");
  }

  sweep.values(level.value, m);
  level.residual = residual_of(level.value, m);
  level.actions.assign(grid.size(), NodeAction{});
  const double slack = kActionSlack * cfg.penalty_tol;
  for (int i = 0; i <= grid.n(); ++i) {
    for (int j = 0; j <= grid.n() - i; ++j) {
      const std::size_t node = grid.index(i, j);
      if (!std::isfinite(m[node]) || !(m[node] < payoff[node] - slack)) continue;
      const InterventionResult best = sweep.at_node(level.value, i, j);
      if (best.delta) level.actions[node] = {Action::Trade, *best.delta};
    }
  }
  level.chained_targets = count_chained(grid, cfg.cost, level.actions);
  return level;
}

}  // namespace

void validate(const SolverConfig& config) {
  validate(config.market);
  validate(config.schedule.goals());
  build_time_segmentation(config.schedule, config.dt);
  const double needed = config.schedule.total_target() + config.cost.c_min();
  if (config.grid.w_max() < needed - 1e-9) {
    throw Error(ErrorCode::InvalidArgument, "grid w_max " + std::to_string(config.grid.w_max()) +
                                                " must be at least sum(G) + c_min = " + std::to_string(needed));
  }
  if (!(config.penalty_rho > 0.0) || !(config.penalty_tol > 0.0) || config.max_penalty_iters < 1) {
    throw Error(ErrorCode::InvalidArgument, "penalty parameters must be positive");
  }
}

const Level& SolveResult::level(std::size_t k, int l) const {
  if (k < 1 || k > segments.size()) {
    throw Error(ErrorCode::UnknownTimeLevel, "segment " + std::to_string(k) + " does not exist");
  }
  const auto& levels = segments[k - 1].levels;
  if (l < 0 || static_cast<std::size_t>(l) >= levels.size()) {
    throw Error(ErrorCode::UnknownTimeLevel, "level " + std::to_string(l) + " outside segment " + std::to_string(k));
  }
  return levels[static_cast<std::size_t>(l)];
}

double SolveResult::max_residual() const noexcept {
  double r = 0.0;
  for (const SegmentSolution& s : segments) {
    for (const Level& l : s.levels) r = std::max(r, l.residual);
  }
  return r;
}

FundingChoice best_funding(std::span<const double> v_next, PortfolioState x, const Goal& goal,
                           const GridSpec& grid) {
  const double x0 = std::max(x.x0, 0.0);
  const int columns = static_cast<int>(std::floor(x0 / grid.dx() + 1e-9));
  std::vector<FundingChoice> candidates;
  candidates.reserve(static_cast<std::size_t>(columns) + 4);
  const auto add = [&](double theta) {
    theta = std::clamp(theta, 0.0, x0);
    const double v = goal.weight * std::max(goal.target - theta, 0.0) +
                     interpolate(v_next, {std::max(x0 - theta, 0.0), x.x1}, grid);
    candidates.push_back({v, theta});
  };
  add(0.0);
  add(std::min(goal.target, x0));
  add(x0);
  for (int m = 0; m <= columns; ++m) add(x0 - m * grid.dx());

  double best = kNoTradeValue;
  for (const FundingChoice& c : candidates) best = std::min(best, c.value);
  FundingChoice choice{best, x0};
  for (const FundingChoice& c : candidates) {
    if (c.value <= best + kTieTol) choice.theta = std::min(choice.theta, c.theta);
  }
  return choice;
}

Level terminal_condition(const SolverConfig& config) {
  const GridSpec& grid = config.grid;
  const std::size_t K = config.schedule.size();
  const Goal& last = config.schedule.goal(K);
  Slice payoff(grid.size());
  for (int i = 0; i <= grid.n(); ++i) {
    for (int j = 0; j <= grid.n() - i; ++j) {
      const double liquid = liquidation_value(grid.node(i, j), config.cost);
      payoff[grid.index(i, j)] = last.weight * std::max(last.target - liquid, 0.0);
    }
  }
  return intervention_fixed_point(std::move(payoff), last.weight * last.target, config);
}

Slice pde_step(std::span<const double> next, std::size_t k, const SolverConfig& config, bool apply_dirichlet) {
  const Slice rhs = transport_x0(next, config);
  Slice out(config.grid.size());
  solve_rows(config, k, rhs, {}, {}, apply_dirichlet, out);
  return out;
}

Level qvi_time_step(std::span<const double> next, std::size_t k, const SolverConfig& config) {
  const GridSpec& grid = config.grid;
  const InterventionSweep sweep(grid, config.cost, config.threads);
  const Slice rhs = transport_x0(next, config);
  const double weight = config.penalty_rho * config.dt;

  Level level;
  level.value.resize(grid.size());
  solve_rows(config, k, rhs, {}, {}, true, level.value);

  Slice m(grid.size());
  Slice penalty(grid.size());
  Slice updated(grid.size());
  double change = kNoTradeValue;
  for (int it = 1; it <= config.max_penalty_iters; ++it) {
    sweep.values(level.value, m);
    for (std::size_t node = 0; node < m.size(); ++node) {
      penalty[node] = (std::isfinite(m[node]) && level.value[node] > m[node]) ? weight : 0.0;
    }
    solve_rows(config, k, rhs, penalty, m, true, updated);
    change = max_abs_diff(updated, level.value);
    level.value.swap(updated);
    level.iterations = it;
    if (change < config.penalty_tol) break;
  }

  sweep.values(level.value, m);
  level.residual = residual_of(level.value, m);
  if (!(change < config.penalty_tol)) {
    throw Error(ErrorCode::PenaltyNonConvergence,
                "penalty iteration stalled after " + std::to_string(config.max_penalty_iters) +
                    " iterations (last change " + std::to_string(change) + ", residual " +
                    std::to_string(level.residual) + ")");
  }

  level.actions.assign(grid.size(), NodeAction{});
  const double slack = kActionSlack * config.penalty_tol;
  for (int i = 0; i <= grid.n(); ++i) {
    for (int j = 0; j <= grid.n() - i; ++j) {
      const std::size_t node = grid.index(i, j);
      if (!std::isfinite(m[node]) || level.value[node] < m[node] - slack) continue;
      const InterventionResult best = sweep.at_node(level.value, i, j);
      if (!best.delta) continue;
      // A zero-size trade only burns c_min; keep holding unless it strictly helps.
      if (std::abs(*best.delta) <= kTieTol && level.value[node] - m[node] <= slack) continue;
      level.actions[node] = {Action::Trade, *best.delta};
    }
  }
  level.chained_targets = count_chained(grid, config.cost, level.actions);
  return level;
}

DeadlineResult deadline_coupling(std::span<const double> v_next, std::size_t k, const SolverConfig& config) {
  if (k < 1 || k >= config.schedule.size()) {
    throw Error(ErrorCode::InvalidArgument, "deadline coupling needs 1 <= k < K, got " + std::to_string(k));
  }
  const GridSpec& grid = config.grid;
  const Goal& goal = config.schedule.goal(k);
  Slice payoff(grid.size());
  std::vector<double> theta(grid.size());
  parallel_for(0, static_cast<std::size_t>(grid.n()) + 1, config.threads, [&](std::size_t iidx) {
    const int i = static_cast<int>(iidx);
    for (int j = 0; j <= grid.n() - i; ++j) {
      const FundingChoice f = best_funding(v_next, grid.node(i, j), goal, grid);
      payoff[grid.index(i, j)] = f.value;
      theta[grid.index(i, j)] = f.theta;
    }
  });
  DeadlineResult result;
  result.level = intervention_fixed_point(std::move(payoff), residual_weighted_targets(config.schedule, k), config);
  result.theta = std::move(theta);
  return result;
}

SolveResult solve(const SolverConfig& config, const ProgressFn& progress) {
  validate(config);
  SolveResult result{config, build_time_segmentation(config.schedule, config.dt), {}, {}};
  const std::size_t K = config.schedule.size();
  result.segments.resize(K);
  result.funding.resize(K - 1);
  for (std::size_t k = 1; k <= K; ++k) {
    result.segments[k - 1].goal = k;
    result.segments[k - 1].levels.resize(static_cast<std::size_t>(result.time.segment(k).steps) + 1);
  }

  for (std::size_t k = K; k >= 1; --k) {
    auto& levels = result.segments[k - 1].levels;
    const int steps = result.time.segment(k).steps;
    if (k == K) {
      levels[steps] = terminal_condition(config);
    } else {
      DeadlineResult d = deadline_coupling(result.segments[k].levels.front().value, k, config);
      levels[steps] = std::move(d.level);
      result.funding[k - 1] = std::move(d.theta);
    }
    if (progress) progress(k, steps);
    for (int l = steps - 1; l >= 0; --l) {
      levels[l] = qvi_time_step(levels[l + 1].value, k, config);
      if (progress) progress(k, l);
    }
  }
  return result;
}

}  // namespace goalqvi
