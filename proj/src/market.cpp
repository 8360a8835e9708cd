#include "goalqvi/market.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "goalqvi/errors.hpp"

namespace goalqvi {

void validate(const MarketParams& market) {
  if (!std::isfinite(market.r) || !std::isfinite(market.mu) || !std::isfinite(market.sigma)) {
    throw Error(ErrorCode::InvalidArgument, "market parameters must be finite");
  }
  if (!(market.sigma > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "sigma must be positive");
  }
}

CostModel CostModel::fixed(double c_min) {
  if (!(c_min > 0.0) || !std::isfinite(c_min)) {
    throw Error(ErrorCode::InvalidArgument, "c_min must be positive, got " + std::to_string(c_min));
  }
  return CostModel(CostKind::Fixed, c_min, 0.0);
}

CostModel CostModel::fixed_plus_proportional(double c_min, double rate) {
  if (!(c_min > 0.0) || !std::isfinite(c_min)) {
    throw Error(ErrorCode::InvalidArgument, "c_min must be positive, got " + std::to_string(c_min));
  }
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "proportional rate must lie in [0, 1)");
  }
  return CostModel(CostKind::FixedPlusProportional, c_min, rate);
}

double CostModel::operator()(double delta) const noexcept {
  switch (kind_) {
    case CostKind::Fixed: return c_min_;
    case CostKind::FixedPlusProportional: return c_min_ + rate_ * std::abs(delta);
  }
  return c_min_;
}

double cost(const CostModel& model, double delta) noexcept { return model(delta); }

double chi(const CostModel& model, double y) {
  if (!(y >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "chi is defined on [0, inf), got " + std::to_string(y));
  }
  if (model.kind() == CostKind::Fixed) return y - model.c_min();

  // Δ + C(Δ) is strictly increasing; bracket the root and bisect.
  const auto f = [&](double d) { return d + model(d) - y; };
  double hi = y;
  double lo = -1.0;
  for (int k = 0; k < 200 && f(lo) > 0.0; ++k) lo *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) > 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return 0.5 * (lo + hi);
}

PortfolioState rebalance(PortfolioState x, double delta, const CostModel& model) noexcept {
  return {x.x0 - delta - model(delta), x.x1 + delta};
}

std::optional<Interval> feasible_interval(PortfolioState x, const CostModel& model) {
  if (in_no_trade_region(x, model)) return std::nullopt;
  const double hi = chi(model, std::max(x.x0, 0.0));
  return Interval{-x.x1, std::max(hi, -x.x1)};
}

bool in_no_trade_region(PortfolioState x, const CostModel& model) noexcept {
  return x.x0 + x.x1 < model(-x.x1) - kBoundaryTol;
}

double liquidation_value(PortfolioState x, const CostModel& model) noexcept {
  return x.x0 + std::max(x.x1 - model(-x.x1), 0.0);
}

}  // namespace goalqvi
