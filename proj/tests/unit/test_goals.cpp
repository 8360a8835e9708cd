#include <gtest/gtest.h>

#include "goalqvi/errors.hpp"
#include "goalqvi/goals.hpp"

using namespace goalqvi;

namespace {
ErrorCode code_of(const std::vector<Goal>& goals) {
  try {
    GoalSchedule s(goals);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::IoError;
}
}  // namespace

TEST(Goals, ValidationCodes) {
  EXPECT_EQ(code_of({{1, 3, 1}, {1, 6, 0.2}}), ErrorCode::NonIncreasingDeadlines);
  EXPECT_EQ(code_of({{1, 0, 1}}), ErrorCode::NonPositiveTarget);
  EXPECT_EQ(code_of({{1, 3, 0}}), ErrorCode::NonPositiveWeight);
  EXPECT_EQ(code_of({{0, 3, 1}}), ErrorCode::NonIncreasingDeadlines);
}

TEST(Goals, ScheduleAccessors) {
  const GoalSchedule s({{1, 3, 1}, {2, 6, 0.2}});
  EXPECT_EQ(s.size(), 2u);
  EXPECT_DOUBLE_EQ(s.goal(2).target, 6.0);
  EXPECT_DOUBLE_EQ(s.horizon(), 2.0);
  EXPECT_DOUBLE_EQ(s.segment_start(1), 0.0);
  EXPECT_DOUBLE_EQ(s.segment_start(2), 1.0);
  EXPECT_DOUBLE_EQ(s.total_target(), 9.0);
  EXPECT_THROW(static_cast<void>(s.goal(3)), Error);
  EXPECT_THROW(static_cast<void>(s.goal(0)), Error);
}

TEST(Goals, ShortfallAndResidualTargets) {
  const GoalSchedule s({{1, 3, 1}, {2, 6, 0.2}});
  EXPECT_DOUBLE_EQ(shortfall_penalty(s, 1, 1.0), 2.0);
  EXPECT_DOUBLE_EQ(shortfall_penalty(s, 1, 5.0), 0.0);
  EXPECT_NEAR(shortfall_penalty(s, 2, 0.0), 1.2, 1e-15);
  EXPECT_NEAR(residual_weighted_targets(s, 1), 4.2, 1e-15);
  EXPECT_NEAR(residual_weighted_targets(s, 2), 1.2, 1e-15);
}
