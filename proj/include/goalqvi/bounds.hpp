#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "goalqvi/goals.hpp"
#include "goalqvi/market.hpp"
#include "goalqvi/qvi_solver.hpp"

namespace goalqvi {

struct SubsolutionParams {
  int a = 0;
  double q = 0.5;
  double lambda = 0.2;
};

/// Requires a ∈ {0, 1}, q ∈ (0, 1) and λ > q·max(r, μ, 0).
void validate(const SubsolutionParams& params, const MarketParams& market);

/// C_k = Σ_{i≥k} 2 w_i G_i^{1−q} e^{λ(T_i − T_k)}.
double subsolution_coefficient(const SubsolutionParams& params, const GoalSchedule& schedule, std::size_t k);

/// F^a_k(t, x) = Σ_{i≥k} w_i G_i − C_k (a + x0 + x1)^q e^{λ(T_k − t)}.
/// Throws InvalidArgument when t lies outside [T_{k−1}, T_k].
double analytic_subsolution(const SubsolutionParams& params, const GoalSchedule& schedule, std::size_t k, double t,
                            PortfolioState x);

struct BoundsViolation {
  std::string check;  // "subsolution", "lower", "upper" or "corner"
  std::size_t k = 0;
  int level = 0;
  double t = 0.0;
  int i = 0;
  int j = 0;
  double gap = 0.0;  // amount by which the check is missed
};

struct BoundsReport {
  bool passed = true;
  double worst_gap = 0.0;  // max over nodes of F⁰ − V (may be negative)
  int worst_i = 0;
  int worst_j = 0;
  std::size_t worst_k = 1;
  double worst_t = 0.0;
  std::vector<BoundsViolation> violations;  // worst few, largest gap first
};

/// F⁰_k ≤ V_k + 1e-6, 0 ≤ V_k ≤ Σ_{i≥k} w_i G_i and the corner value at
/// every node and stored level.
BoundsReport check_bounds(const SolveResult& result, const SubsolutionParams& params);

std::string to_json(const BoundsReport& report);

}  // namespace goalqvi
