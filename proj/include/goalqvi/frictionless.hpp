#pragma once

#include <cstddef>
#include <iosfwd>
#include <utility>
#include <vector>

#include "goalqvi/goals.hpp"
#include "goalqvi/grid.hpp"
#include "goalqvi/market.hpp"

namespace goalqvi {

struct FrictionlessConfig {
  MarketParams market;
  GoalSchedule schedule;
  double w_max = 9.02;
  int n = 200;
  double dt = 0.01;
  int pi_points = 51;  // stock proportions {0, 1/(pi_points−1), ..., 1}
};

struct FrictionlessLevel {
  std::vector<double> value;    // U_k(t, w_i)
  std::vector<double> pi_star;  // π*(t, w_i)
  int iterations = 0;           // policy iterations used
};

struct FrictionlessResult {
  FrictionlessConfig config;
  TimeSegmentation time;
  std::vector<std::vector<FrictionlessLevel>> segments;  // [k − 1][level]
  std::vector<std::vector<double>> funding;              // θ*_k(w_i), k < K

  [[nodiscard]] double dx() const noexcept { return config.w_max / config.n; }
  [[nodiscard]] double wealth(int i) const noexcept { return i * dx(); }
  [[nodiscard]] const FrictionlessLevel& level(std::size_t k, int l) const;
  /// Linear interpolation of U_k at level l.
  [[nodiscard]] double value(std::size_t k, int l, double w) const;
};

/// Backward induction on the wealth grid: implicit monotone steps with a
/// policy iteration over the discrete π set (ties to the smaller π), and
/// goal funding min over θ at each deadline.
FrictionlessResult solve_frictionless(const FrictionlessConfig& config);

/// (w, π*) on segment 1 at time t (snapped to the nearest level).
std::vector<std::pair<double, double>> v_shape_profile(const FrictionlessResult& result, double t);

/// `w,value,pi_star`.
void write_frictionless_csv(std::ostream& out, const FrictionlessResult& result, std::size_t k, int level);

/// `w,theta_star` at deadline k.
void write_frictionless_funding_csv(std::ostream& out, const FrictionlessResult& result, std::size_t k);

}  // namespace goalqvi
