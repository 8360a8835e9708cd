#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace goalqvi {

struct Goal {
  double deadline = 0.0;  // T_k
  double target = 0.0;    // G_k
  double weight = 0.0;    // w_k
};

/// Throws Error with NonIncreasingDeadlines, NonPositiveTarget or
/// NonPositiveWeight naming the offending goal.
void validate(std::span<const Goal> goals);

/// Ordered goal deadlines with targets and weights. Goal indices in the
/// public API are 1-based (k = 1..K) to line up with the value-function
/// segments V_1..V_K.
class GoalSchedule {
 public:
  explicit GoalSchedule(std::vector<Goal> goals);

  [[nodiscard]] std::size_t size() const noexcept { return goals_.size(); }
  [[nodiscard]] const Goal& goal(std::size_t k) const;
  [[nodiscard]] const std::vector<Goal>& goals() const noexcept { return goals_; }
  [[nodiscard]] double horizon() const noexcept { return goals_.back().deadline; }
  /// T_{k-1}, with T_0 = 0.
  [[nodiscard]] double segment_start(std::size_t k) const;
  [[nodiscard]] double total_target() const noexcept;

 private:
  std::vector<Goal> goals_;
};

/// w_k (G_k − θ)⁺.
double shortfall_penalty(const GoalSchedule& schedule, std::size_t k, double theta);

/// Σ_{i ≥ k} w_i G_i: the value at the empty portfolio and the upper bound of V_k.
double residual_weighted_targets(const GoalSchedule& schedule, std::size_t k);

}  // namespace goalqvi
