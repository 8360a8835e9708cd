#pragma once

#include <limits>
#include <optional>
#include <span>

#include "goalqvi/grid.hpp"
#include "goalqvi/market.hpp"

namespace goalqvi {

/// ℳ value reported when D(x) is empty.
inline constexpr double kNoTradeValue = std::numeric_limits<double>::infinity();

/// Candidate values closer than this are treated as ties.
inline constexpr double kTieTol = 1e-12;

struct InterventionResult {
  double value = kNoTradeValue;
  std::optional<double> delta;  // empty iff x is in the no-trade region
};

/// ℳ[V](x): the best interpolated value reachable by one feasible trade.
/// Candidates are the endpoints of D(x), Δ = 0, and every Δ that puts the
/// post-trade stock holding on a lattice row. Ties go to the smallest |Δ|.
InterventionResult intervention_value(std::span<const double> slice, PortfolioState x, const CostModel& cost,
                                      const GridSpec& grid);

/// ℳ evaluated over all lattice nodes of a slice.
///
/// For fixed costs every node on the diagonal i + j = s maps onto the same
/// post-trade line x0 + x1 = s·dx − c, so the candidate set (and hence ℳ)
/// is shared along the diagonal and one sweep costs O(n²) instead of O(n³).
/// Other cost kinds fall back to intervention_value() per node.
class InterventionSweep {
 public:
  InterventionSweep(const GridSpec& grid, const CostModel& cost, unsigned threads = 1);

  /// Writes ℳ[slice] at every node into out (kNoTradeValue where D(x) = ∅).
  void values(std::span<const double> slice, std::span<double> out) const;

  /// ℳ value and tie-broken optimal trade at lattice node (i, j).
  [[nodiscard]] InterventionResult at_node(std::span<const double> slice, int i, int j) const;

 private:
  void diagonal_values(std::span<const double> slice, std::span<double> per_diagonal) const;

  GridSpec grid_;
  CostModel cost_;
  unsigned threads_;
};

}  // namespace goalqvi
