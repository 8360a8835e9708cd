#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "goalqvi/errors.hpp"
#include "goalqvi/grid.hpp"

using namespace goalqvi;

TEST(Grid, NodeCountAndIndexing) {
  const GridSpec g(9.02, 200);
  EXPECT_EQ(g.size(), 201u * 202u / 2u);
  EXPECT_NEAR(g.dx(), 0.0451, 1e-15);
  std::set<std::size_t> seen;
  for (int i = 0; i <= g.n(); ++i) {
    for (int j = 0; j <= g.n() - i; ++j) seen.insert(g.index(i, j));
  }
  EXPECT_EQ(seen.size(), g.size());
  EXPECT_EQ(*seen.rbegin(), g.size() - 1);
  EXPECT_THROW(GridSpec(9.02, 1), Error);
}

TEST(Grid, NearestNodeStaysInTriangle) {
  const GridSpec g(1.0, 10);
  EXPECT_EQ(g.nearest_node({0.31, 0.19}), std::make_pair(3, 2));
  const auto [i, j] = g.nearest_node({0.56, 0.46});
  EXPECT_LE(i + j, 10);
  EXPECT_EQ(g.nearest_node({5.0, 0.0}), std::make_pair(10, 0));
}

TEST(Grid, InterpolationIsExactForAffineFunctions) {
  const GridSpec g(3.0, 12);
  Slice s(g.size());
  const auto f = [](double a, double b) { return 1.5 - 0.7 * a + 0.25 * b; };
  for (int i = 0; i <= g.n(); ++i) {
    for (int j = 0; j <= g.n() - i; ++j) s[g.index(i, j)] = f(i * g.dx(), j * g.dx());
  }
  for (const PortfolioState x : {PortfolioState{0.1, 0.2}, PortfolioState{1.37, 1.6}, PortfolioState{2.99, 0.0},
                                 PortfolioState{0.0, 3.0}, PortfolioState{1.4, 1.55}}) {
    EXPECT_NEAR(interpolate(s, x, g), f(x.x0, x.x1), 1e-12) << x.x0 << "," << x.x1;
  }
  EXPECT_NEAR(interpolate_on_row(s, g, 3, 2.4), f(2.4 * g.dx(), 3 * g.dx()), 1e-12);
  EXPECT_NEAR(interpolate_on_column(s, g, 2, 4.6), f(2 * g.dx(), 4.6 * g.dx()), 1e-12);
  EXPECT_THROW(static_cast<void>(interpolate(s, {2.0, 1.1}, g)), Error);
  EXPECT_NO_THROW(static_cast<void>(interpolate(s, {2.0, 1.0 + 1e-10}, g)));
}

TEST(Grid, BilinearOnInteriorCells) {
  const GridSpec g(4.0, 4);
  Slice s(g.size(), 0.0);
  s[g.index(1, 1)] = 1.0;
  EXPECT_NEAR(interpolate(s, {0.5, 0.5}, g), 0.25, 1e-15);
  EXPECT_NEAR(interpolate(s, {1.5, 1.5}, g), 0.25, 1e-15);
}

TEST(Grid, TimeSegmentation) {
  const GoalSchedule s({{1, 3, 1}, {2, 6, 0.2}});
  const TimeSegmentation t = build_time_segmentation(s, 0.01);
  EXPECT_EQ(t.segment(1).steps, 100);
  EXPECT_EQ(t.segment(2).steps, 100);
  EXPECT_EQ(t.total_levels(), 201);
  EXPECT_EQ(t.global_level(2, 0), 100);
  EXPECT_DOUBLE_EQ(t.time(1, 100), 1.0);
  EXPECT_NEAR(t.time(2, 50), 1.5, 1e-12);
  try {
    build_time_segmentation(s, 0.03);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MisalignedStep);
  }
}

TEST(Grid, SliceCsvRoundTrip) {
  const GridSpec g(1.0, 5);
  Slice s(g.size());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = 1.0 / (3.0 + static_cast<double>(i));
  std::stringstream buf;
  write_slice_csv(buf, s, g);
  EXPECT_EQ(buf.str().substr(0, 12), "x0,x1,value\n");
  EXPECT_EQ(read_slice_csv(buf, g), s);
}
