#include <gtest/gtest.h>

#include <sstream>

#include "goalqvi/frictionless.hpp"

using namespace goalqvi;

namespace {

const FrictionlessResult& benchmark() {
  static const FrictionlessResult r = solve_frictionless(
      {{0.0, 0.3, 0.4}, GoalSchedule({{1.0, 3.0, 1.0}, {2.0, 6.0, 0.2}}), 9.02, 200, 0.01, 51});
  return r;
}

}  // namespace

TEST(Frictionless, BoundaryValues) {
  const FrictionlessResult& r = benchmark();
  const int n = r.config.n;
  for (std::size_t k = 1; k <= 2; ++k) {
    const double corner = k == 1 ? 4.2 : 1.2;
    for (int l = 0; l <= 100; ++l) {
      const FrictionlessLevel& lv = r.level(k, l);
      EXPECT_NEAR(lv.value[0], corner, 1e-12);
      // The deadline level comes from funding, not from the boundary data.
      if (l < 100) EXPECT_NEAR(lv.value[static_cast<std::size_t>(n)], 0.0, 1e-12);
    }
  }
  // Zero once wealth covers both targets.
  for (int i = 0; i <= n; ++i) {
    if (r.wealth(i) >= 9.0) EXPECT_NEAR(r.level(1, 0).value[static_cast<std::size_t>(i)], 0.0, 1e-10);
  }
}

TEST(Frictionless, MonotoneAndBounded) {
  const FrictionlessResult& r = benchmark();
  for (int l : {0, 50, 100}) {
    const auto& v = r.level(1, l).value;
    for (std::size_t i = 1; i < v.size(); ++i) {
      EXPECT_LE(v[i], v[i - 1] + 1e-12);
      EXPECT_GE(v[i], -1e-12);
    }
    for (double pi : r.level(1, l).pi_star) {
      EXPECT_GE(pi, 0.0);
      EXPECT_LE(pi, 1.0);
    }
  }
}

TEST(Frictionless, FundingFullyOrNothing) {
  const FrictionlessResult& r = benchmark();
  ASSERT_EQ(r.funding.size(), 1u);
  for (int i = 0; i <= r.config.n; ++i) {
    const double w = r.wealth(i);
    const double theta = r.funding[0][static_cast<std::size_t>(i)];
    EXPECT_LE(theta, std::min(3.0, w) + 1e-12);
    if (w >= 3.0) EXPECT_NEAR(theta, 3.0, r.dx());
  }
}

TEST(Frictionless, StockIsUsedWhereGoalsAreOutOfReach) {
  const FrictionlessResult& r = benchmark();
  const auto profile = v_shape_profile(r, 0.9);
  ASSERT_EQ(profile.size(), 201u);
  // Just short of G_1 shortly before T_1 the optimal bet is all-in.
  double at = -1.0;
  for (const auto& [w, pi] : profile) {
    if (std::abs(w - 2.0) < 0.03) at = pi;
  }
  EXPECT_GT(at, 0.5);
  std::ostringstream os;
  write_frictionless_csv(os, r, 1, 0);
  EXPECT_EQ(os.str().substr(0, 15), "w,value,pi_star");
  std::ostringstream fs;
  write_frictionless_funding_csv(fs, r, 1);
  EXPECT_EQ(fs.str().substr(0, 12), "w,theta_star");
}
