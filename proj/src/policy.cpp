#include "goalqvi/policy.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "goalqvi/errors.hpp"
#include "goalqvi/intervention.hpp"

namespace goalqvi {
namespace {

constexpr double kTimeTol = 1e-9;
constexpr double kSnapTol = 1e-9;

double snap(double v, double dx) {
  const double cells = std::round(v / dx);
  return std::abs(v - cells * dx) <= kSnapTol ? cells * dx : v;
}

}  // namespace

LevelRef locate_level(const SolveResult& result, double t) {
  const LevelRef ref = nearest_level(result, t);
  if (std::abs(result.time.time(ref.k, ref.level) - t) > kTimeTol) {
    throw Error(ErrorCode::UnknownTimeLevel, "t = " + std::to_string(t) + " is not a stored time level");
  }
  return ref;
}

LevelRef nearest_level(const SolveResult& result, double t) {
  const auto& segments = result.time.segments();
  const double dt = result.time.dt();
  for (const TimeSegment& seg : segments) {
    if (t <= seg.end + kTimeTol || seg.goal == segments.size()) {
      const double steps = std::round((t - seg.start) / dt);
      return {seg.goal, static_cast<int>(std::clamp(steps, 0.0, static_cast<double>(seg.steps)))};
    }
  }
  return {1, 0};
}

std::string_view to_string(RegionLabel label) {
  switch (label) {
    case RegionLabel::Continue: return "continue";
    case RegionLabel::Buy: return "buy";
    case RegionLabel::Sell: return "sell";
  }
  return "continue";
}

RegionMap classify_regions(const SolveResult& result, LevelRef ref) {
  const Level& level = result.level(ref.k, ref.level);
  const GridSpec& grid = result.config.grid;
  RegionMap map{ref, result.time.time(ref.k, ref.level), grid, {}};
  map.cells.resize(grid.size());
  for (int i = 0; i <= grid.n(); ++i) {
    for (int j = 0; j <= grid.n() - i; ++j) {
      const std::size_t node = grid.index(i, j);
      const NodeAction& a = level.actions[node];
      RegionCell& cell = map.cells[node];
      cell.target = grid.node(i, j);
      if (a.kind != Action::Trade) continue;
      cell.label = a.delta > 0.0 ? RegionLabel::Buy : RegionLabel::Sell;
      cell.delta = a.delta;
      cell.target = rebalance(grid.node(i, j), a.delta, result.config.cost);
    }
  }
  return map;
}

RegionMap classify_regions(const SolveResult& result, double t) { return classify_regions(result, locate_level(result, t)); }

std::vector<PortfolioState> target_points(const RegionMap& map) {
  std::vector<PortfolioState> out;
  const double dx = map.grid.dx();
  for (const RegionCell& cell : map.cells) {
    if (cell.label == RegionLabel::Continue) continue;
    out.push_back({snap(cell.target.x0, dx), snap(cell.target.x1, dx)});
  }
  std::sort(out.begin(), out.end(), [](const PortfolioState& a, const PortfolioState& b) {
    return a.x0 != b.x0 ? a.x0 < b.x0 : a.x1 < b.x1;
  });
  const auto same = [](const PortfolioState& a, const PortfolioState& b) {
    return std::abs(a.x0 - b.x0) <= kSnapTol && std::abs(a.x1 - b.x1) <= kSnapTol;
  };
  out.erase(std::unique(out.begin(), out.end(), same), out.end());
  return out;
}

void write_regions_csv(std::ostream& out, const RegionMap& map) {
  out << "x0,x1,label,delta_star,target_x0,target_x1\n";
  const GridSpec& grid = map.grid;
  std::string line;
  for (int i = 0; i <= grid.n(); ++i) {
    for (int j = 0; j <= grid.n() - i; ++j) {
      const RegionCell& cell = map.cells[grid.index(i, j)];
      const PortfolioState x = grid.node(i, j);
      line = format_double(x.x0) + ',' + format_double(x.x1) + ',' + std::string(to_string(cell.label)) + ',' +
             format_double(cell.delta) + ',';
      if (cell.label != RegionLabel::Continue) {
        line += format_double(cell.target.x0) + ',' + format_double(cell.target.x1);
      } else {
        line += ',';
      }
      line += '\n';
      out << line;
    }
  }
}

void write_targets_csv(std::ostream& out, const std::vector<PortfolioState>& targets) {
  out << "x0,x1\n";
  for (const PortfolioState& p : targets) out << format_double(p.x0) << ',' << format_double(p.x1) << '\n';
}

double funding_rule(const SolveResult& result, std::size_t k, PortfolioState x) {
  const SolverConfig& cfg = result.config;
  if (k < 1 || k >= cfg.schedule.size()) {
    throw Error(ErrorCode::InvalidArgument, "funding rule needs 1 <= k < K, got " + std::to_string(k));
  }
  const Goal& goal = cfg.schedule.goal(k);
  const double x0 = std::max(x.x0, 0.0);
  if (!cfg.grid.contains(x)) return std::min(goal.target, x0);
  return best_funding(result.segments[k].levels.front().value, x, goal, cfg.grid).theta;
}

Policy::Policy(const SolveResult& result) : result_(result) {}

PolicyAction Policy::trade(LevelRef ref, PortfolioState x) const {
  const SolverConfig& cfg = result_.config;
  const GridSpec& grid = cfg.grid;
  if (!x.admissible()) {
    throw Error(ErrorCode::OutOfDomain, "state (" + std::to_string(x.x0) + ", " + std::to_string(x.x1) +
                                            ") has a short position");
  }
  if (!grid.contains(x)) {
    if (x.x1 > 0.0 && feasible_interval(x, cfg.cost)) return {PolicyAction::Kind::Trade, -x.x1};
    return {};
  }
  const Level& level = result_.level(ref.k, ref.level);
  const auto [i, j] = grid.nearest_node(x);
  if (level.actions[grid.index(i, j)].kind != Action::Trade) return {};
  const InterventionResult best = intervention_value(level.value, x, cfg.cost, grid);
  if (!best.delta || std::abs(*best.delta) <= kTieTol) return {};
  return {PolicyAction::Kind::Trade, *best.delta};
}

PolicyAction Policy::action(double t, PortfolioState x) const {
  const LevelRef ref = nearest_level(result_, t);
  const PolicyAction trade_action = trade(ref, x);
  const TimeSegment& seg = result_.time.segment(ref.k);
  if (ref.level != seg.steps || trade_action.kind == PolicyAction::Kind::Trade) return trade_action;
  if (ref.k == result_.config.schedule.size()) {
    return {PolicyAction::Kind::Fund, liquidation_value(x, result_.config.cost)};
  }
  return {PolicyAction::Kind::Fund, funding_rule(result_, ref.k, x)};
}

}  // namespace goalqvi
