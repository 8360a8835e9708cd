#pragma once

#include "goalqvi/qvi_solver.hpp"

// Small two-goal problems that solve in well under a second.
inline goalqvi::SolverConfig small_config(int n = 40, double c_min = 0.02, double dt = 0.05) {
  using namespace goalqvi;
  return SolverConfig{{0.0, 0.3, 0.4},
                      CostModel::fixed(c_min),
                      GoalSchedule({{1.0, 3.0, 1.0}, {2.0, 6.0, 0.2}}),
                      GridSpec(9.0 + c_min, n),
                      dt};
}

inline const goalqvi::SolveResult& small_solution() {
  static const goalqvi::SolveResult result = goalqvi::solve(small_config());
  return result;
}
