#include "goalqvi/grid.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include "goalqvi/errors.hpp"

namespace goalqvi {

GridSpec::GridSpec(double w_max, int n) : w_max_(w_max), n_(n), dx_(w_max / n) {
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "grid needs n >= 2, got " + std::to_string(n));
  if (!(w_max > 0.0) || !std::isfinite(w_max)) {
    throw Error(ErrorCode::InvalidArgument, "grid w_max must be positive");
  }
}

GridSpec build_grid(double w_max, int n) { return GridSpec(w_max, n); }

std::pair<int, int> GridSpec::nearest_node(PortfolioState x) const noexcept {
  int i = static_cast<int>(std::lround(std::max(x.x0, 0.0) / dx_));
  int j = static_cast<int>(std::lround(std::max(x.x1, 0.0) / dx_));
  i = std::min(i, n_);
  j = std::min(j, n_);
  while (i + j > n_) {
    // Drop the coordinate whose rounding overshot the most.
    const double over_i = i - x.x0 / dx_;
    const double over_j = j - x.x1 / dx_;
    if ((over_i >= over_j && i > 0) || j == 0) {
      --i;
    } else {
      --j;
    }
  }
  return {i, j};
}

bool GridSpec::contains(PortfolioState x, double tol) const noexcept {
  return x.x0 >= -tol && x.x1 >= -tol && x.x0 + x.x1 <= w_max_ + tol;
}

double interpolate(std::span<const double> slice, PortfolioState x, const GridSpec& grid) {
  if (!grid.contains(x)) {
    throw Error(ErrorCode::OutOfDomain, "point (" + std::to_string(x.x0) + ", " + std::to_string(x.x1) +
                                            ") lies outside the grid triangle");
  }
  const int n = grid.n();
  double u = std::clamp(x.x0 / grid.dx(), 0.0, static_cast<double>(n));
  double v = std::clamp(x.x1 / grid.dx(), 0.0, static_cast<double>(n));
  if (u + v > n) {
    const double excess = 0.5 * (u + v - n);
    u = std::max(u - excess, 0.0);
    v = static_cast<double>(n) - u;
  }

  int i = std::min(static_cast<int>(u), n - 1);
  int j = std::min(static_cast<int>(v), n - 1);
  if (i + j >= n) {
    // Only reachable at a hypotenuse node; move to the cell on its left or below.
    if (i > 0) {
      --i;
    } else {
      --j;
    }
  }
  const double fx = u - i;
  const double fy = v - j;

  const double v00 = slice[grid.index(i, j)];
  const double v10 = slice[grid.index(i + 1, j)];
  const double v01 = slice[grid.index(i, j + 1)];
  if (i + j + 2 <= n) {
    const double v11 = slice[grid.index(i + 1, j + 1)];
    return (1.0 - fx) * (1.0 - fy) * v00 + fx * (1.0 - fy) * v10 + (1.0 - fx) * fy * v01 + fx * fy * v11;
  }
  // Cut cell: the upper-right corner is outside, so use the lower-left triangle.
  const double w00 = std::max(1.0 - fx - fy, 0.0);
  return w00 * v00 + fx * v10 + fy * v01;
}

double interpolate_on_column(std::span<const double> slice, const GridSpec& grid, int i, double v) noexcept {
  const int last = grid.n() - i;
  if (last == 0) return slice[grid.index(i, 0)];
  int j = std::min(static_cast<int>(v), last - 1);
  const double f = v - j;
  const double a = slice[grid.index(i, j)];
  const double b = slice[grid.index(i, j + 1)];
  return a + f * (b - a);
}

TimeSegmentation::TimeSegmentation(double dt, std::vector<TimeSegment> segments)
    : dt_(dt), segments_(std::move(segments)) {}

double TimeSegmentation::time(std::size_t k, int level) const {
  const TimeSegment& s = segment(k);
  if (level < 0 || level > s.steps) {
    throw Error(ErrorCode::UnknownTimeLevel, "level " + std::to_string(level) + " outside segment " +
                                                 std::to_string(k));
  }
  if (level == s.steps) return s.end;
  return s.start + level * dt_;
}

int TimeSegmentation::global_level(std::size_t k, int level) const {
  int base = 0;
  for (std::size_t i = 1; i < k; ++i) base += segment(i).steps;
  return base + level;
}

int TimeSegmentation::total_levels() const noexcept {
  int total = 1;
  for (const TimeSegment& s : segments_) total += s.steps;
  return total;
}

TimeSegmentation build_time_segmentation(const GoalSchedule& schedule, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw Error(ErrorCode::InvalidArgument, "dt must be positive");
  std::vector<TimeSegment> segments;
  for (std::size_t k = 1; k <= schedule.size(); ++k) {
    const double start = schedule.segment_start(k);
    const double end = schedule.goal(k).deadline;
    const double ratio = (end - start) / dt;
    const double steps = std::round(ratio);
    if (steps < 1.0 || std::abs(steps * dt - (end - start)) > 1e-9) {
      throw Error(ErrorCode::MisalignedStep, "dt = " + std::to_string(dt) + " does not divide segment " +
                                                 std::to_string(k) + " of length " + std::to_string(end - start));
    }
    segments.push_back({k, start, end, static_cast<int>(steps)});
  }
  return TimeSegmentation(dt, std::move(segments));
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

void write_slice_csv(std::ostream& out, std::span<const double> slice, const GridSpec& grid) {
  out << "x0,x1,value\n";
  std::string line;
  for (int i = 0; i <= grid.n(); ++i) {
    for (int j = 0; j <= grid.n() - i; ++j) {
      const PortfolioState x = grid.node(i, j);
      line.clear();
      line += format_double(x.x0);
      line += ',';
      line += format_double(x.x1);
      line += ',';
      line += format_double(slice[grid.index(i, j)]);
      line += '\n';
      out << line;
    }
  }
}

Slice read_slice_csv(std::istream& in, const GridSpec& grid) {
  std::string line;
  if (!std::getline(in, line) || line != "x0,x1,value") {
    throw Error(ErrorCode::IoError, "slice CSV must start with header x0,x1,value");
  }
  Slice values;
  values.reserve(grid.size());
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto last = line.rfind(',');
    if (last == std::string::npos) throw Error(ErrorCode::IoError, "malformed slice row: " + line);
    double v = 0.0;
    const auto res = std::from_chars(line.data() + last + 1, line.data() + line.size(), v);
    if (res.ec != std::errc()) throw Error(ErrorCode::IoError, "malformed value in row: " + line);
    values.push_back(v);
  }
  if (values.size() != grid.size()) {
    throw Error(ErrorCode::IoError, "slice has " + std::to_string(values.size()) + " rows, grid expects " +
                                        std::to_string(grid.size()));
  }
  return values;
}

}  // namespace goalqvi
