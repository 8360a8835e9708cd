#include "goalqvi/bounds.hpp"

#include <algorithm>
#include <cmath>
#include "json.hpp"

#include "goalqvi/errors.hpp"

namespace goalqvi {
namespace {

constexpr double kSubsolutionTol = 1e-6;
constexpr double kRangeTol = 1e-9;
constexpr double kCornerTol = 1e-10;
constexpr std::size_t kMaxViolations = 20;

}  // namespace

void validate(const SubsolutionParams& params, const MarketParams& market) {
  if (params.a != 0 && params.a != 1) throw Error(ErrorCode::InvalidArgument, "subsolution a must be 0 or 1");
  if (!(params.q > 0.0 && params.q < 1.0)) throw Error(ErrorCode::InvalidArgument, "subsolution q must lie in (0, 1)");
  const double floor = params.q * std::max({market.r, market.mu, 0.0});
  if (!(params.lambda > floor)) {
    throw Error(ErrorCode::InvalidArgument,
                "subsolution lambda must exceed q*max(r, mu, 0) = " + std::to_string(floor));
  }
}

double subsolution_coefficient(const SubsolutionParams& params, const GoalSchedule& schedule, std::size_t k) {
  const double tk = schedule.goal(k).deadline;
  double c = 0.0;
  for (std::size_t i = k; i <= schedule.size(); ++i) {
    const Goal& g = schedule.goal(i);
    c += 2.0 * g.weight * std::pow(g.target, 1.0 - params.q) * std::exp(params.lambda * (g.deadline - tk));
  }
  return c;
}

double analytic_subsolution(const SubsolutionParams& params, const GoalSchedule& schedule, std::size_t k, double t,
                            PortfolioState x) {
  const double start = schedule.segment_start(k);
  const double end = schedule.goal(k).deadline;
  if (t < start - 1e-12 || t > end + 1e-12) {
    throw Error(ErrorCode::InvalidArgument, "t = " + std::to_string(t) + " outside segment " + std::to_string(k));
  }
  const double wealth = std::max(params.a + x.x0 + x.x1, 0.0);
  return residual_weighted_targets(schedule, k) - subsolution_coefficient(params, schedule, k) *
                                                      std::pow(wealth, params.q) *
                                                      std::exp(params.lambda * (end - t));
}

BoundsReport check_bounds(const SolveResult& result, const SubsolutionParams& params) {
  const SolverConfig& cfg = result.config;
  const GridSpec& grid = cfg.grid;
  validate(params, cfg.market);

  BoundsReport report;
  report.worst_gap = -kNoTradeValue;
  const auto note = [&](const char* check, std::size_t k, int l, double t, int i, int j, double gap) {
    report.passed = false;
    report.violations.push_back({check, k, l, t, i, j, gap});
  };

  for (std::size_t k = 1; k <= result.segments.size(); ++k) {
    const double upper = residual_weighted_targets(cfg.schedule, k);
    const auto& levels = result.segments[k - 1].levels;
    for (std::size_t l = 0; l < levels.size(); ++l) {
      const int level = static_cast<int>(l);
      const double t = result.time.time(k, level);
      const Slice& v = levels[l].value;
      for (int i = 0; i <= grid.n(); ++i) {
        for (int j = 0; j <= grid.n() - i; ++j) {
          const double value = v[grid.index(i, j)];
          const double gap = analytic_subsolution(params, cfg.schedule, k, t, grid.node(i, j)) - value;
          if (gap > report.worst_gap) {
            report.worst_gap = gap;
            report.worst_i = i;
            report.worst_j = j;
            report.worst_k = k;
            report.worst_t = t;
          }
          if (gap > kSubsolutionTol) note("subsolution", k, level, t, i, j, gap);
          if (value < -kRangeTol) note("lower", k, level, t, i, j, -value);
          if (value > upper + kRangeTol) note("upper", k, level, t, i, j, value - upper);
          if (i == 0 && j == 0 && std::abs(value - upper) > kCornerTol) {
            note("corner", k, level, t, i, j, std::abs(value - upper));
          }
        }
      }
    }
  }
  std::stable_sort(report.violations.begin(), report.violations.end(),
                   [](const BoundsViolation& a, const BoundsViolation& b) { return a.gap > b.gap; });
  if (report.violations.size() > kMaxViolations) report.violations.resize(kMaxViolations);
  return report;
}

std::string to_json(const BoundsReport& report) {
  nlohmann::json j;
  j["passed"] = report.passed;
  j["worst_gap"] = report.worst_gap;
  j["worst_node"] = {report.worst_i, report.worst_j, report.worst_k, report.worst_t};
  j["violations"] = nlohmann::json::array();
  for (const BoundsViolation& v : report.violations) {
    j["violations"].push_back(
        {{"check", v.check}, {"k", v.k}, {"level", v.level}, {"t", v.t}, {"node", {v.i, v.j}}, {"gap", v.gap}});
  }
  return j.dump(2);
}

}  // namespace goalqvi
