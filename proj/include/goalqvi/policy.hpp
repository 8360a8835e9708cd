#pragma once

#include <cstddef>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "goalqvi/grid.hpp"
#include "goalqvi/market.hpp"
#include "goalqvi/qvi_solver.hpp"

namespace goalqvi {

/// A stored time level: segment k, level l within it.
struct LevelRef {
  std::size_t k = 1;
  int level = 0;
};

/// The stored level at time t (within 1e-9). An interior deadline T_k maps
/// to the last level of segment k, i.e. the surface before funding goal k.
LevelRef locate_level(const SolveResult& result, double t);

/// The stored level closest to t, clamped to [0, T_K].
LevelRef nearest_level(const SolveResult& result, double t);

enum class RegionLabel { Continue, Buy, Sell };

std::string_view to_string(RegionLabel label);

struct RegionCell {
  RegionLabel label = RegionLabel::Continue;
  double delta = 0.0;     // Δ*, zero on Continue cells
  PortfolioState target;  // Γ(x, Δ*), the node itself on Continue cells
};

struct RegionMap {
  LevelRef level;
  double t = 0.0;
  GridSpec grid;
  std::vector<RegionCell> cells;  // GridSpec::index order
};

RegionMap classify_regions(const SolveResult& result, LevelRef level);

/// Throws UnknownTimeLevel unless t is a stored level.
RegionMap classify_regions(const SolveResult& result, double t);

/// Deduplicated post-trade points of all trading cells, coordinates within
/// 1e-9 of a lattice line snapped onto it, sorted by (x0, x1).
std::vector<PortfolioState> target_points(const RegionMap& map);

/// `x0,x1,label,delta_star,target_x0,target_x1`; target fields are empty on
/// Continue cells.
void write_regions_csv(std::ostream& out, const RegionMap& map);

/// `x0,x1` per target point.
void write_targets_csv(std::ostream& out, const std::vector<PortfolioState>& targets);

/// θ*_k at the continuous state x, re-optimised against the interpolated
/// V_{k+1}(T_k, ·). States above the grid fund min(G_k, x0). Requires k < K.
double funding_rule(const SolveResult& result, std::size_t k, PortfolioState x);

struct PolicyAction {
  enum class Kind { Hold, Trade, Fund };
  Kind kind = Kind::Hold;
  double amount = 0.0;  // Δ for Trade, θ for Fund
};

/// Feedback strategy backed by a solved surface. Keeps a reference to the
/// result, which must outlive the policy.
class Policy {
 public:
  explicit Policy(const SolveResult& result);

  [[nodiscard]] const SolveResult& result() const noexcept { return result_; }

  /// Hold or Trade at stored level (k, l). Region membership comes from the
  /// nearest node's label; the trade size is re-optimised at x itself.
  /// Above the grid: liquidate once if x1 > 0, otherwise hold.
  [[nodiscard]] PolicyAction trade(LevelRef level, PortfolioState x) const;

  /// Full decision at time t (snapped to the nearest stored level). At a
  /// deadline a pending trade comes first; once none is left the goal is
  /// funded, by θ* for k < K and by the liquidation value at T_K.
  [[nodiscard]] PolicyAction action(double t, PortfolioState x) const;

 private:
  const SolveResult& result_;
};

}  // namespace goalqvi
