#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "goalqvi/goals.hpp"
#include "goalqvi/market.hpp"

namespace goalqvi {

/// Node values of one time level, stored in GridSpec::index order.
using Slice = std::vector<double>;

/// Triangular lattice {(i, j) : i, j >= 0, i + j <= n} with x = (i·dx, j·dx).
/// Nodes are numbered row-major in i (the x0 index), then j.
class GridSpec {
 public:
  GridSpec(double w_max, int n);

  [[nodiscard]] int n() const noexcept { return n_; }
  [[nodiscard]] double dx() const noexcept { return dx_; }
  [[nodiscard]] double w_max() const noexcept { return w_max_; }
  [[nodiscard]] std::size_t size() const noexcept { return offset(n_ + 1); }

  /// Number of nodes with x0 index i (j = 0..n − i).
  [[nodiscard]] int row_length(int i) const noexcept { return n_ - i + 1; }
  [[nodiscard]] std::size_t offset(int i) const noexcept {
    const auto ii = static_cast<std::size_t>(i);
    return ii * static_cast<std::size_t>(n_ + 1) - ii * (ii - (ii > 0 ? 1 : 0)) / 2;
  }
  [[nodiscard]] std::size_t index(int i, int j) const noexcept { return offset(i) + static_cast<std::size_t>(j); }
  [[nodiscard]] PortfolioState node(int i, int j) const noexcept { return {i * dx_, j * dx_}; }

  /// Closest lattice node inside the triangle.
  [[nodiscard]] std::pair<int, int> nearest_node(PortfolioState x) const noexcept;

  /// Whether x lies in the closed triangle, up to tol.
  [[nodiscard]] bool contains(PortfolioState x, double tol = 1e-9) const noexcept;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;

 private:
  double w_max_;
  int n_;
  double dx_;
};

GridSpec build_grid(double w_max, int n);

/// Bilinear on the unit cell containing x; barycentric on the lower-left
/// triangle of cells cut by the hypotenuse. Throws OutOfDomain when x is
/// further than 1e-9 outside the triangle; smaller excursions are clipped.
double interpolate(std::span<const double> slice, PortfolioState x, const GridSpec& grid);

/// Linear interpolation along lattice row j (x1 = j·dx) at x0 = u·dx.
/// Equivalent to interpolate() for points with x1 on the row; no checks.
inline double interpolate_on_row(std::span<const double> slice, const GridSpec& grid, int j, double u) noexcept {
  const int last = grid.n() - j;
  int i = static_cast<int>(u);
  if (i >= last) i = last > 0 ? last - 1 : 0;
  if (last == 0) return slice[grid.index(0, j)];
  const double f = u - i;
  const double a = slice[grid.index(i, j)];
  const double b = slice[grid.index(i + 1, j)];
  return a + f * (b - a);
}

/// Linear interpolation along lattice column i (x0 = i·dx) at x1 = v·dx.
double interpolate_on_column(std::span<const double> slice, const GridSpec& grid, int i, double v) noexcept;

/// Uniform per-goal time ladders whose endpoints are the deadlines.
struct TimeSegment {
  std::size_t goal = 1;  // k
  double start = 0.0;    // T_{k-1}
  double end = 0.0;      // T_k
  int steps = 0;         // m_k
};

class TimeSegmentation {
 public:
  TimeSegmentation(double dt, std::vector<TimeSegment> segments);

  [[nodiscard]] double dt() const noexcept { return dt_; }
  [[nodiscard]] const std::vector<TimeSegment>& segments() const noexcept { return segments_; }
  [[nodiscard]] const TimeSegment& segment(std::size_t k) const { return segments_.at(k - 1); }
  [[nodiscard]] double time(std::size_t k, int level) const;
  /// Global level index of (segment k, level l); the levels at interior
  /// deadlines are shared by two segments.
  [[nodiscard]] int global_level(std::size_t k, int level) const;
  [[nodiscard]] int total_levels() const noexcept;

 private:
  double dt_;
  std::vector<TimeSegment> segments_;
};

/// Throws MisalignedStep if dt does not divide every segment within 1e-9.
TimeSegmentation build_time_segmentation(const GoalSchedule& schedule, double dt);

/// CSV with header `x0,x1,value`, 17 significant digits, GridSpec order.
void write_slice_csv(std::ostream& out, std::span<const double> slice, const GridSpec& grid);
Slice read_slice_csv(std::istream& in, const GridSpec& grid);

/// `%.17g`-style rendering, exact for round trips.
std::string format_double(double v);

}  // namespace goalqvi
