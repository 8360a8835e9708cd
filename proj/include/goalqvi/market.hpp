#pragma once

#include <optional>

namespace goalqvi {

/// Boundary tolerance for region membership tests (D(x) is closed, so
/// points on the no-trade boundary count as feasible).
inline constexpr double kBoundaryTol = 1e-12;

/// Dollar holdings: x0 in the bank account, x1 in the stock.
struct PortfolioState {
  double x0 = 0.0;
  double x1 = 0.0;

  [[nodiscard]] double total() const noexcept { return x0 + x1; }
  [[nodiscard]] bool admissible() const noexcept { return x0 >= 0.0 && x1 >= 0.0; }

  friend bool operator==(const PortfolioState&, const PortfolioState&) = default;
};

struct MarketParams {
  double r = 0.0;
  double mu = 0.0;
  double sigma = 0.0;
};

/// Throws InvalidArgument unless sigma > 0 and all fields are finite.
void validate(const MarketParams& market);

enum class CostKind { Fixed, FixedPlusProportional };

/// Transaction cost C(Δ). Always strictly positive, minimal at Δ = 0.
class CostModel {
 public:
  static CostModel fixed(double c_min);
  /// Requires 0 <= rate < 1 so that Δ + C(Δ) stays strictly increasing.
  static CostModel fixed_plus_proportional(double c_min, double rate);

  [[nodiscard]] CostKind kind() const noexcept { return kind_; }
  [[nodiscard]] double c_min() const noexcept { return c_min_; }
  [[nodiscard]] double rate() const noexcept { return rate_; }

  [[nodiscard]] double operator()(double delta) const noexcept;

 private:
  CostModel(CostKind kind, double c_min, double rate) : kind_(kind), c_min_(c_min), rate_(rate) {}

  CostKind kind_;
  double c_min_;
  double rate_;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  [[nodiscard]] bool contains(double v, double tol = kBoundaryTol) const noexcept {
    return v >= lo - tol && v <= hi + tol;
  }
};

double cost(const CostModel& model, double delta) noexcept;

/// Inverse of Δ ↦ Δ + C(Δ) on [0, ∞).
double chi(const CostModel& model, double y);

/// Γ(x, Δ) = (x0 − Δ − C(Δ), x1 + Δ). Does not check feasibility.
PortfolioState rebalance(PortfolioState x, double delta, const CostModel& model) noexcept;

/// D(x) = [−x1, χ(x0)], or nullopt when x lies in the no-trade region.
std::optional<Interval> feasible_interval(PortfolioState x, const CostModel& model);

bool in_no_trade_region(PortfolioState x, const CostModel& model) noexcept;

/// L(x) = x0 + (x1 − C(−x1))⁺.
double liquidation_value(PortfolioState x, const CostModel& model) noexcept;

}  // namespace goalqvi
