#include "goalqvi/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>

#include "json.hpp"
#include "goalqvi/errors.hpp"
#include "goalqvi/parallel.hpp"

namespace goalqvi {
namespace {

constexpr double kAlignTol = 1e-9;
constexpr double kClampTol = 1e-9;

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

long long aligned_steps(double span, double step) {
  const double ratio = span / step;
  const double rounded = std::round(ratio);
  if (std::abs(ratio - rounded) > kAlignTol * std::max(1.0, std::abs(ratio))) return -1;
  return static_cast<long long>(rounded);
}

// Decision points of one path: the stored level used at each sim step and
// the deadline (if any) that falls on it.
struct Schedule {
  std::vector<LevelRef> level;
  std::vector<std::size_t> deadline;  // 0 when the step is not a deadline
};

Schedule build_schedule(const SolveResult& result, const SimConfig& cfg) {
  const auto& segments = result.time.segments();
  const double horizon = segments.back().end;
  const long long total = aligned_steps(horizon - cfg.start_time, cfg.dt_sim);
  if (total < 0) throw Error(ErrorCode::InvalidArgument, "dt_sim must divide the time to the last deadline");
  const double dt = result.time.dt();
  if (aligned_steps(dt, cfg.dt_sim) < 1 && aligned_steps(cfg.dt_sim, dt) < 1) {
    throw Error(ErrorCode::InvalidArgument, "dt_sim and the solver dt must be integer multiples of each other");
  }

  Schedule s;
  s.level.resize(static_cast<std::size_t>(total) + 1);
  s.deadline.assign(static_cast<std::size_t>(total) + 1, 0);
  for (const TimeSegment& seg : segments) {
    if (seg.end < cfg.start_time - kAlignTol) continue;
    const long long at = aligned_steps(seg.end - cfg.start_time, cfg.dt_sim);
    if (at < 0) throw Error(ErrorCode::InvalidArgument, "dt_sim must divide every deadline offset");
    s.deadline[static_cast<std::size_t>(at)] = seg.goal;
  }
  for (std::size_t step = 0; step < s.level.size(); ++step) {
    const double t = cfg.start_time + static_cast<double>(step) * cfg.dt_sim;
    if (s.deadline[step] != 0) {
      const std::size_t k = s.deadline[step];
      s.level[step] = {k, result.time.segment(k).steps};
      continue;
    }
    // Nearest later stored level.
    const TimeSegment* seg = &segments.back();
    for (const TimeSegment& candidate : segments) {
      if (t < candidate.end - kAlignTol) {
        seg = &candidate;
        break;
      }
    }
    const double cells = std::ceil((t - seg->start) / dt - kAlignTol);
    s.level[step] = {seg->goal, static_cast<int>(std::clamp(cells, 0.0, static_cast<double>(seg->steps)))};
  }
  return s;
}

void check_compatible(const SolveResult& result) {
  const GridSpec& grid = result.config.grid;
  if (result.segments.size() != result.config.schedule.size() ||
      result.funding.size() + 1 != result.config.schedule.size()) {
    throw Error(ErrorCode::IncompatiblePolicy, "policy segments do not match the goal schedule");
  }
  for (std::size_t k = 1; k <= result.segments.size(); ++k) {
    const auto& levels = result.segments[k - 1].levels;
    if (levels.size() != static_cast<std::size_t>(result.time.segment(k).steps) + 1) {
      throw Error(ErrorCode::IncompatiblePolicy, "segment " + std::to_string(k) + " has the wrong number of levels");
    }
    for (const Level& l : levels) {
      if (l.value.size() != grid.size() || l.actions.size() != grid.size()) {
        throw Error(ErrorCode::IncompatiblePolicy, "stored surface does not match the grid");
      }
    }
  }
}

void validate(const SimConfig& cfg, const SolveResult& result) {
  if (cfg.n_paths == 0) throw Error(ErrorCode::InvalidArgument, "n_paths must be positive");
  if (!(cfg.dt_sim > 0.0)) throw Error(ErrorCode::InvalidArgument, "dt_sim must be positive");
  if (!cfg.initial.admissible() || !std::isfinite(cfg.initial.total())) {
    throw Error(ErrorCode::InvalidArgument, "initial state must be finite with x0, x1 >= 0");
  }
  if (cfg.start_time < -kAlignTol || cfg.start_time >= result.config.schedule.horizon()) {
    throw Error(ErrorCode::InvalidArgument, "start_time must lie in [0, T_K)");
  }
}

PortfolioState clamp_state(PortfolioState x) {
  if (x.x0 < 0.0 && x.x0 > -kClampTol) x.x0 = 0.0;
  if (x.x1 < 0.0 && x.x1 > -kClampTol) x.x1 = 0.0;
  return x;
}

PathOutcome run_path(const Policy& policy, const SimConfig& cfg, const Schedule& sched, std::uint64_t path,
                     std::vector<TraceEvent>* trace) {
  const SolveResult& result = policy.result();
  const SolverConfig& solver = result.config;
  const std::size_t K = solver.schedule.size();
  const int cap = static_cast<int>(std::ceil(solver.grid.w_max() / solver.cost.c_min())) + static_cast<int>(K);

  std::mt19937_64 gen(splitmix64(cfg.seed ^ path));
  std::normal_distribution<double> normal(0.0, 1.0);

  PathOutcome out;
  out.shortfall.assign(K, 0.0);
  PortfolioState x = cfg.initial;
  double t = cfg.start_time;
  const auto record = [&](const char* event, double amount) {
    if (trace) trace->push_back({t, x, event, amount});
  };
  record("start", 0.0);

  const auto try_trade = [&](LevelRef ref) {
    if (out.trades >= cap) {
      out.capped = true;
      return false;
    }
    const PolicyAction a = policy.trade(ref, x);
    if (a.kind != PolicyAction::Kind::Trade) return false;
    out.cost_paid += cost(solver.cost, a.amount);
    x = clamp_state(rebalance(x, a.amount, solver.cost));
    ++out.trades;
    record("trade", a.amount);
    return true;
  };

  for (std::size_t step = 0;; ++step) {
    t = cfg.start_time + static_cast<double>(step) * cfg.dt_sim;
    const std::size_t k = sched.deadline[step];
    if (k == 0) {
      try_trade(sched.level[step]);
    } else {
      while (try_trade(sched.level[step])) {
      }
      const Goal& goal = solver.schedule.goal(k);
      if (k == K) {
        const double theta = liquidation_value(x, solver.cost);
        out.shortfall[k - 1] = std::max(goal.target - theta, 0.0);
        out.objective += goal.weight * out.shortfall[k - 1];
        x = {0.0, 0.0};
        record("fund", theta);
        break;
      }
      const double theta = funding_rule(result, k, x);
      out.shortfall[k - 1] = std::max(goal.target - theta, 0.0);
      out.objective += goal.weight * out.shortfall[k - 1];
      x.x0 = std::max(x.x0 - theta, 0.0);
      record("fund", theta);
      try_trade({k + 1, 0});
    }
    const double z = normal(gen);
    x.x1 = gbm_step(x.x1, cfg.dt_sim, z, solver.market);
    x.x0 = bank_step(x.x0, cfg.dt_sim, solver.market);
  }
  record("end", out.objective);
  return out;
}

}  // namespace

double gbm_step(double x1, double dt, double z, const MarketParams& market) noexcept {
  const double drift = (market.mu - 0.5 * market.sigma * market.sigma) * dt;
  return x1 * std::exp(drift + market.sigma * std::sqrt(dt) * z);
}

double bank_step(double x0, double dt, const MarketParams& market) noexcept { return x0 * std::exp(market.r * dt); }

PathOutcome simulate_path(const Policy& policy, const SimConfig& config, std::uint64_t path,
                          std::vector<TraceEvent>* trace) {
  check_compatible(policy.result());
  validate(config, policy.result());
  return run_path(policy, config, build_schedule(policy.result(), config), path, trace);
}

SimResult simulate(const Policy& policy, const SimConfig& config) {
  const SolveResult& result = policy.result();
  check_compatible(result);
  validate(config, result);
  const Schedule sched = build_schedule(result, config);

  std::vector<PathOutcome> outcomes(config.n_paths);
  const unsigned threads = resolve_threads(config.threads);
  const std::size_t blocks = std::min<std::size_t>(config.n_paths, static_cast<std::size_t>(threads) * 8);
  parallel_for(0, blocks, threads, [&](std::size_t b) {
    for (std::size_t p = b; p < config.n_paths; p += blocks) outcomes[p] = run_path(policy, config, sched, p, nullptr);
  });

  // Kahan sums in path order keep the result independent of the thread count.
  struct Kahan {
    double sum = 0.0, c = 0.0;
    void add(double v) {
      const double y = v - c;
      const double t = sum + y;
      c = (t - sum) - y;
      sum = t;
    }
  };
  const std::size_t K = result.config.schedule.size();
  Kahan obj, trades, paid;
  std::vector<Kahan> shortfall(K);
  SimResult sim;
  sim.n_paths = config.n_paths;
  for (const PathOutcome& o : outcomes) {
    obj.add(o.objective);
    trades.add(o.trades);
    paid.add(o.cost_paid);
    for (std::size_t k = 0; k < K; ++k) shortfall[k].add(o.shortfall[k]);
    if (o.capped) ++sim.capped_paths;
  }
  const double n = static_cast<double>(config.n_paths);
  sim.mean_objective = obj.sum / n;
  sim.mean_trades = trades.sum / n;
  sim.mean_total_cost_paid = paid.sum / n;
  for (const Kahan& s : shortfall) sim.per_goal_mean_shortfall.push_back(s.sum / n);
  if (config.n_paths > 1) {
    Kahan sq;
    for (const PathOutcome& o : outcomes) sq.add((o.objective - sim.mean_objective) * (o.objective - sim.mean_objective));
    sim.std_error = std::sqrt(sq.sum / (n - 1.0)) / std::sqrt(n);
  }
  return sim;
}

ValueComparison compare_to_value(const SimResult& sim, double pde_value) {
  ValueComparison c;
  c.sim_mean = sim.mean_objective;
  c.std_error = sim.std_error;
  c.pde_value = pde_value;
  c.gap = std::abs(sim.mean_objective - pde_value);
  c.gap_sigma = sim.std_error > 0.0 ? c.gap / sim.std_error
                                    : (c.gap > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
  c.tolerance = std::max(3.0 * sim.std_error, 0.05);
  c.passed = c.gap <= c.tolerance;
  return c;
}

std::string to_json(const SimResult& sim, const ValueComparison& comparison) {
  nlohmann::json j;
  j["n_paths"] = sim.n_paths;
  j["mean_objective"] = sim.mean_objective;
  j["std_error"] = sim.std_error;
  j["mean_trades"] = sim.mean_trades;
  j["mean_total_cost_paid"] = sim.mean_total_cost_paid;
  j["per_goal_mean_shortfall"] = sim.per_goal_mean_shortfall;
  j["capped_paths"] = sim.capped_paths;
  j["comparison"] = {{"pde_value", comparison.pde_value},
                     {"gap", comparison.gap},
                     {"gap_sigma", std::isfinite(comparison.gap_sigma) ? nlohmann::json(comparison.gap_sigma)
                                                                        : nlohmann::json("inf")},
                     {"tolerance", comparison.tolerance},
                     {"pass", comparison.passed}};
  return j.dump(2);
}

void write_trace_csv(std::ostream& out, const std::vector<TraceEvent>& trace) {
  out << "t,x0,x1,event\n";
  for (const TraceEvent& e : trace) {
    out << format_double(e.t) << ',' << format_double(e.x.x0) << ',' << format_double(e.x.x1) << ',' << e.event
        << '\n';
  }
}

}  // namespace goalqvi
