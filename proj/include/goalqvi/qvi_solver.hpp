#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "goalqvi/goals.hpp"
#include "goalqvi/grid.hpp"
#include "goalqvi/intervention.hpp"
#include "goalqvi/market.hpp"

namespace goalqvi {

struct SolverConfig {
  MarketParams market;
  CostModel cost;
  GoalSchedule schedule;
  GridSpec grid;
  double dt = 0.01;
  double penalty_rho = 1e7;
  double penalty_tol = 1e-8;
  int max_penalty_iters = 50;
  unsigned threads = 1;
};

/// Checks market, schedule and step alignment, and that the grid reaches
/// Σ G_i + c_min so the zero plateau lies inside the domain.
void validate(const SolverConfig& config);

enum class Action : std::uint8_t { Hold, Trade };

struct NodeAction {
  Action kind = Action::Hold;
  double delta = 0.0;  // Δ*, meaningful for Trade only

  friend bool operator==(const NodeAction&, const NodeAction&) = default;
};

/// One solved time level.
struct Level {
  Slice value;
  std::vector<NodeAction> actions;
  double residual = 0.0;  // max_x (V − ℳ[V])⁺
  int iterations = 0;     // penalty (or fixed-point) iterations used
  int chained_targets = 0;  // trading nodes whose target's nearest node also trades
};

/// Levels of segment k, levels[l] at time T_{k−1} + l·dt; the last level
/// is the pre-funding surface V_k(T_k, ·).
struct SegmentSolution {
  std::size_t goal = 1;
  std::vector<Level> levels;
};

struct SolveResult {
  SolverConfig config;
  TimeSegmentation time;
  std::vector<SegmentSolution> segments;
  /// funding[k − 1][node] = θ*_k for k = 1..K−1.
  std::vector<std::vector<double>> funding;

  [[nodiscard]] const Level& level(std::size_t k, int l) const;
  [[nodiscard]] double max_residual() const noexcept;
};

struct FundingChoice {
  double value = 0.0;
  double theta = 0.0;
};

/// min over θ of w_k (G_k − θ)⁺ + V_{k+1}(T_k, x0 − θ, x1), θ drawn from
/// {0, min(G_k, x0), x0} and every θ leaving x0 − θ on the lattice.
/// Ties go to the smallest θ.
FundingChoice best_funding(std::span<const double> v_next, PortfolioState x, const Goal& goal,
                           const GridSpec& grid);

/// V_K(T_K, ·): the fixed point of V ← min(U, ℳ[V]) with
/// U = w_K (G_K − L(x))⁺, corner pinned to w_K G_K.
Level terminal_condition(const SolverConfig& config);

/// One backward step of ℒ[V] = 0 for segment k: explicit upwind in x0,
/// then implicit in x1 row by row. With apply_dirichlet the hypotenuse is
/// held at 0 and the corner at Σ_{i≥k} w_i G_i; otherwise both carry the
/// transported data.
Slice pde_step(std::span<const double> next, std::size_t k, const SolverConfig& config,
               bool apply_dirichlet = true);

/// Penalised QVI step with lagged ℳ.
Level qvi_time_step(std::span<const double> next, std::size_t k, const SolverConfig& config);

struct DeadlineResult {
  Level level;
  std::vector<double> theta;  // θ*_k per node
};

/// Builds V_k(T_k, ·) from V_{k+1}(T_k, ·), k < K.
DeadlineResult deadline_coupling(std::span<const double> v_next, std::size_t k, const SolverConfig& config);

/// Called after each level is finished with (k, level index).
using ProgressFn = std::function<void(std::size_t, int)>;

SolveResult solve(const SolverConfig& config, const ProgressFn& progress = {});

}  // namespace goalqvi
