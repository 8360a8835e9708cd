#include "goalqvi/intervention.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "goalqvi/parallel.hpp"

namespace goalqvi {
namespace {

struct Candidate {
  double delta;
  double value;
};

// Minimum value; among near-ties the smallest |Δ|.
InterventionResult pick(std::span<const Candidate> candidates) {
  double best = kNoTradeValue;
  for (const Candidate& c : candidates) best = std::min(best, c.value);
  std::optional<double> delta;
  for (const Candidate& c : candidates) {
    if (c.value <= best + kTieTol && (!delta || std::abs(c.delta) < std::abs(*delta))) delta = c.delta;
  }
  return {best, delta};
}

}  // namespace

InterventionResult intervention_value(std::span<const double> slice, PortfolioState x, const CostModel& cost,
                                      const GridSpec& grid) {
  const auto feasible = feasible_interval(x, cost);
  if (!feasible) return {};

  const double dx = grid.dx();
  std::vector<Candidate> candidates;
  const auto add = [&](double delta) {
    PortfolioState y = rebalance(x, delta, cost);
    y.x0 = std::max(y.x0, 0.0);
    y.x1 = std::max(y.x1, 0.0);
    candidates.push_back({delta, interpolate(slice, y, grid)});
  };

  add(feasible->lo);
  add(feasible->hi);
  if (feasible->contains(0.0, 0.0)) add(0.0);
  const int m_lo = std::max(0, static_cast<int>(std::ceil((x.x1 + feasible->lo) / dx - 1e-9)));
  const int m_hi = static_cast<int>(std::floor((x.x1 + feasible->hi) / dx + 1e-9));
  for (int m = m_lo; m <= m_hi; ++m) {
    const double delta = std::clamp(m * dx - x.x1, feasible->lo, feasible->hi);
    add(delta);
  }
  return pick(candidates);
}

InterventionSweep::InterventionSweep(const GridSpec& grid, const CostModel& cost, unsigned threads)
    : grid_(grid), cost_(cost), threads_(std::max(threads, 1u)) {}

void InterventionSweep::diagonal_values(std::span<const double> slice, std::span<double> per_diagonal) const {
  const int n = grid_.n();
  const double dx = grid_.dx();
  const double c = cost_.c_min();
  const double c_cells = c / dx;
  parallel_for(0, static_cast<std::size_t>(n) + 1, threads_, [&](std::size_t sidx) {
    const int s = static_cast<int>(sidx);
    const double line = s * dx - c;
    if (line < -kBoundaryTol) {
      per_diagonal[sidx] = kNoTradeValue;
      return;
    }
    const double line_cells = std::max(line / dx, 0.0);
    const int m_hi = static_cast<int>(std::floor(line_cells + 1e-9));
    double best = interpolate_on_column(slice, grid_, 0, line_cells);
    for (int m = 0; m <= m_hi; ++m) {
      const double u = std::max(s - c_cells - m, 0.0);
      best = std::min(best, interpolate_on_row(slice, grid_, m, u));
    }
    per_diagonal[sidx] = best;
  });
}

void InterventionSweep::values(std::span<const double> slice, std::span<double> out) const {
  const int n = grid_.n();
  if (cost_.kind() == CostKind::Fixed) {
    std::vector<double> per_diagonal(static_cast<std::size_t>(n) + 1);
    diagonal_values(slice, per_diagonal);
    for (int i = 0; i <= n; ++i) {
      for (int j = 0; j <= n - i; ++j) out[grid_.index(i, j)] = per_diagonal[static_cast<std::size_t>(i + j)];
    }
    return;
  }
  parallel_for(0, static_cast<std::size_t>(n) + 1, threads_, [&](std::size_t iidx) {
    const int i = static_cast<int>(iidx);
    for (int j = 0; j <= n - i; ++j) {
      out[grid_.index(i, j)] = intervention_value(slice, grid_.node(i, j), cost_, grid_).value;
    }
  });
}

InterventionResult InterventionSweep::at_node(std::span<const double> slice, int i, int j) const {
  if (cost_.kind() != CostKind::Fixed) return intervention_value(slice, grid_.node(i, j), cost_, grid_);

  const double dx = grid_.dx();
  const double c_cells = cost_.c_min() / dx;
  const int s = i + j;
  const double line = s * dx - cost_.c_min();
  if (line < -kBoundaryTol) return {};
  const double line_cells = std::max(line / dx, 0.0);
  const int m_hi = static_cast<int>(std::floor(line_cells + 1e-9));
  std::vector<Candidate> candidates;
  candidates.reserve(static_cast<std::size_t>(m_hi) + 2);
  candidates.push_back({line - j * dx, interpolate_on_column(slice, grid_, 0, line_cells)});
  for (int m = 0; m <= m_hi; ++m) {
    const double u = std::max(s - c_cells - m, 0.0);
    candidates.push_back({(m - j) * dx, interpolate_on_row(slice, grid_, m, u)});
  }
  return pick(candidates);
}

}  // namespace goalqvi
