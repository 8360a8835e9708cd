#include "goalqvi/goals.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "goalqvi/errors.hpp"

namespace goalqvi {

void validate(std::span<const Goal> goals) {
  if (goals.empty()) throw Error(ErrorCode::InvalidArgument, "goal schedule is empty");
  double previous = 0.0;
  for (std::size_t i = 0; i < goals.size(); ++i) {
    const Goal& g = goals[i];
    const std::string tag = "goal " + std::to_string(i + 1);
    if (!std::isfinite(g.deadline) || !(g.deadline > previous)) {
      throw Error(ErrorCode::NonIncreasingDeadlines,
                  tag + " deadline " + std::to_string(g.deadline) + " must exceed " + std::to_string(previous));
    }
    if (!std::isfinite(g.target) || !(g.target > 0.0)) {
      throw Error(ErrorCode::NonPositiveTarget, tag + " target must be positive");
    }
    if (!std::isfinite(g.weight) || !(g.weight > 0.0)) {
      throw Error(ErrorCode::NonPositiveWeight, tag + " weight must be positive");
    }
    previous = g.deadline;
  }
}

GoalSchedule::GoalSchedule(std::vector<Goal> goals) : goals_(std::move(goals)) { validate(goals_); }

const Goal& GoalSchedule::goal(std::size_t k) const {
  if (k < 1 || k > goals_.size()) {
    throw Error(ErrorCode::InvalidArgument, "goal index " + std::to_string(k) + " out of range");
  }
  return goals_[k - 1];
}

double GoalSchedule::segment_start(std::size_t k) const { return k == 1 ? 0.0 : goal(k - 1).deadline; }

double GoalSchedule::total_target() const noexcept {
  double sum = 0.0;
  for (const Goal& g : goals_) sum += g.target;
  return sum;
}

double shortfall_penalty(const GoalSchedule& schedule, std::size_t k, double theta) {
  const Goal& g = schedule.goal(k);
  return g.weight * std::max(g.target - theta, 0.0);
}

double residual_weighted_targets(const GoalSchedule& schedule, std::size_t k) {
  static_cast<void>(schedule.goal(k));  // range check
  double sum = 0.0;
  for (std::size_t i = k; i <= schedule.size(); ++i) {
    const Goal& g = schedule.goal(i);
    sum += g.weight * g.target;
  }
  return sum;
}

}  // namespace goalqvi
