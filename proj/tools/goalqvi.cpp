#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "goalqvi/bounds.hpp"
#include "goalqvi/config.hpp"
#include "goalqvi/errors.hpp"
#include "goalqvi/frictionless.hpp"
#include "goalqvi/parallel.hpp"
#include "goalqvi/policy.hpp"
#include "goalqvi/run_store.hpp"
#include "goalqvi/simulator.hpp"

namespace fs = std::filesystem;
using namespace goalqvi;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitCheck = 4;

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonConvergence:
    case ErrorCode::PenaltyNonConvergence: return kExitSolver;
    default: return kExitConfig;
  }
}

std::vector<double> default_times(const SolverConfig& cfg) {
  std::vector<double> times{0.0};
  for (const Goal& g : cfg.schedule.goals()) times.push_back(g.deadline);
  return times;
}

void write_regions(const SolveResult& result, const fs::path& dir, const std::vector<double>& times) {
  for (double t : times) {
    const LevelRef ref = locate_level(result, t);
    const RegionMap map = classify_regions(result, ref);
    const std::string tag = level_tag(result.time.global_level(ref.k, ref.level));
    std::ostringstream regions, targets;
    write_regions_csv(regions, map);
    write_targets_csv(targets, target_points(map));
    write_file(dir / ("regions_" + tag + ".csv"), regions.str());
    write_file(dir / ("targets_" + tag + ".csv"), targets.str());
  }
}

int cmd_solve(const std::string& config_path, const std::string& out_dir, unsigned threads) {
  RunConfig config = load_config(config_path);
  config.solver.threads = resolve_threads(threads ? threads : config.solver.threads);
  const fs::path dir = out_dir.empty() ? fs::path(config.output_dir) : fs::path(out_dir);
  const auto start = std::chrono::steady_clock::now();
  const SolveResult result = solve(config.solver);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_run(dir, config, result);
  std::fprintf(stderr, "solved %d levels in %.2f s, max residual %.3e -> %s\n", result.time.total_levels(), seconds,
               result.max_residual(), dir.string().c_str());
  return 0;
}

int cmd_regions(const std::string& run_dir, std::vector<double> times, const std::string& out_dir) {
  const LoadedRun run = load_run(run_dir);
  if (times.empty()) times = default_times(run.config.solver);
  write_regions(run.result, out_dir.empty() ? fs::path(run_dir) / "regions" : fs::path(out_dir), times);
  return 0;
}

struct SimulateArgs {
  std::string run_dir;
  double x0 = 0.0;
  double x1 = 0.0;
  std::optional<std::size_t> paths;
  std::optional<std::uint64_t> seed;
  std::optional<double> dt_sim;
  double t0 = 0.0;
  bool assert_pass = false;
  std::string out;
  std::string trace;
  unsigned threads = 0;
};

int cmd_simulate(const SimulateArgs& a) {
  if (!std::isfinite(a.x0) || !std::isfinite(a.x1) || a.x0 < 0.0 || a.x1 < 0.0) {
    throw Error(ErrorCode::InvalidArgument, "initial state must have x0, x1 >= 0");
  }
  const LoadedRun run = load_run(a.run_dir);
  const Policy policy(run.result);
  SimConfig sim;
  sim.n_paths = a.paths.value_or(run.config.sim.paths);
  sim.seed = a.seed.value_or(run.config.sim.seed);
  sim.dt_sim = a.dt_sim.value_or(run.config.sim.dt);
  sim.initial = {a.x0, a.x1};
  sim.start_time = a.t0;
  sim.threads = resolve_threads(a.threads);

  const GridSpec& grid = run.config.solver.grid;
  if (!grid.contains(sim.initial)) throw Error(ErrorCode::InvalidArgument, "initial state lies outside the grid");
  const LevelRef ref = locate_level(run.result, a.t0);
  const double pde = interpolate(run.result.level(ref.k, ref.level).value, sim.initial, grid);

  const SimResult result = simulate(policy, sim);
  const ValueComparison cmp = compare_to_value(result, pde);
  const std::string json = to_json(result, cmp) + "\n";
  if (a.out.empty()) {
    std::cout << json;
  } else {
    write_file(a.out, json);
  }
  if (!a.trace.empty()) {
    std::vector<TraceEvent> trace;
    simulate_path(policy, sim, 0, &trace);
    std::ostringstream csv;
    write_trace_csv(csv, trace);
    write_file(a.trace, csv.str());
  }
  return a.assert_pass && !cmp.passed ? kExitCheck : 0;
}

int cmd_bounds(const std::string& run_dir, const SubsolutionParams& params, const std::string& out) {
  const LoadedRun run = load_run(run_dir);
  const BoundsReport report = check_bounds(run.result, params);
  const std::string json = to_json(report) + "\n";
  if (out.empty()) {
    std::cout << json;
  } else {
    write_file(out, json);
  }
  return report.passed ? 0 : kExitCheck;
}

int cmd_frictionless(const std::string& config_path, const std::string& out_dir, std::vector<double> times) {
  const RunConfig config = load_config(config_path);
  const SolverConfig& s = config.solver;
  const FrictionlessResult result =
      solve_frictionless({s.market, s.schedule, s.grid.w_max(), s.grid.n(), s.dt, 51});
  const fs::path dir = out_dir.empty() ? fs::path(config.output_dir) / "frictionless" : fs::path(out_dir);
  if (times.empty()) times = {0.0, 0.5, 0.9};
  for (double t : times) {
    const TimeSegmentation& ts = result.time;
    std::size_t k = ts.segments().size();
    for (const TimeSegment& seg : ts.segments()) {
      if (t <= seg.end + 1e-9) {
        k = seg.goal;
        break;
      }
    }
    const TimeSegment& seg = ts.segment(k);
    const double steps = std::round((t - seg.start) / ts.dt());
    if (std::abs(seg.start + steps * ts.dt() - t) > 1e-9 || steps < 0 || steps > seg.steps) {
      throw Error(ErrorCode::UnknownTimeLevel, "t = " + std::to_string(t) + " is not a stored time level");
    }
    const int level = static_cast<int>(steps);
    std::ostringstream csv;
    write_frictionless_csv(csv, result, k, level);
    write_file(dir / ("frictionless_" + level_tag(ts.global_level(k, level)) + ".csv"), csv.str());
  }
  for (std::size_t k = 1; k < s.schedule.size(); ++k) {
    std::ostringstream csv;
    write_frictionless_funding_csv(csv, result, k);
    write_file(dir / ("frictionless_funding_k" + std::to_string(k) + ".csv"), csv.str());
  }
  return 0;
}

int cmd_export(const std::string& run_dir, const std::string& out_dir) {
  const LoadedRun run = load_run(run_dir);
  const SolveResult& result = run.result;
  const SolverConfig& cfg = run.config.solver;
  const GridSpec& grid = cfg.grid;
  const fs::path dir = out_dir.empty() ? fs::path(run_dir) / "figures" : fs::path(out_dir);

  std::vector<double> times{0.0, 0.5, 0.9};
  for (const Goal& g : cfg.schedule.goals()) times.push_back(g.deadline);
  std::vector<double> stored;
  for (double t : times) {
    try {
      static_cast<void>(locate_level(result, t));
      stored.push_back(t);
    } catch (const Error&) {
      // not a level of this run
    }
  }
  write_regions(result, dir, stored);
  for (double t : stored) {
    const LevelRef ref = locate_level(result, t);
    std::string csv = "total_wealth,stock_proportion\n";
    for (const PortfolioState& p : target_points(classify_regions(result, ref))) {
      if (p.total() <= 0.0) continue;
      csv += format_double(p.total()) + ',' + format_double(p.x1 / p.total()) + '\n';
    }
    write_file(dir / ("proportions_" + level_tag(result.time.global_level(ref.k, ref.level)) + ".csv"), csv);
  }
  for (std::size_t k = 1; k < cfg.schedule.size(); ++k) {
    const double target = cfg.schedule.goal(k).target;
    std::string csv = "total_wealth,theta_ratio\n";
    for (int i = 0; i <= grid.n(); ++i) {
      for (int j = 0; j <= grid.n() - i; ++j) {
        const PortfolioState x = grid.node(i, j);
        csv += format_double(x.total()) + ',' + format_double(result.funding[k - 1][grid.index(i, j)] / target) + '\n';
      }
    }
    write_file(dir / ("funding_k" + std::to_string(k) + ".csv"), csv);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Goal-based portfolio selection with fixed transaction costs"};
  app.require_subcommand(1);
  app.fallthrough();
  unsigned threads = 0;
  app.add_option("--threads", threads, "Worker threads (0 = GOALQVI_THREADS or all cores)");

  std::string config_path, run_dir, out;
  std::vector<double> times;

  auto* solve_cmd = app.add_subcommand("solve", "Solve the QVI system and store the run");
  solve_cmd->add_option("config", config_path, "JSON config")->required();
  solve_cmd->add_option("--out", out, "Output directory (default: config output_dir)");

  auto* regions_cmd = app.add_subcommand("regions", "Write trading regions and target points");
  regions_cmd->add_option("run", run_dir, "Run directory")->required();
  regions_cmd->add_option("--t", times, "Stored time levels (default: 0 and every deadline)");
  regions_cmd->add_option("--out", out, "Output directory (default: <run>/regions)");

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo run of the stored policy");
  sim_cmd->add_option("run", sim.run_dir, "Run directory")->required();
  sim_cmd->add_option("--x0", sim.x0, "Initial bank holding")->required();
  sim_cmd->add_option("--x1", sim.x1, "Initial stock holding")->required();
  sim_cmd->add_option("--paths", sim.paths, "Number of paths");
  sim_cmd->add_option("--seed", sim.seed, "Seed");
  sim_cmd->add_option("--dt-sim", sim.dt_sim, "Simulation step");
  sim_cmd->add_option("--t0", sim.t0, "Start time (a stored level)");
  sim_cmd->add_flag("--assert", sim.assert_pass, "Exit 4 if the PDE comparison fails");
  sim_cmd->add_option("--out", sim.out, "Write the JSON report here instead of stdout");
  sim_cmd->add_option("--trace", sim.trace, "Write path 0 as t,x0,x1,event CSV");

  SubsolutionParams params;
  auto* bounds_cmd = app.add_subcommand("bounds", "Check the stored surfaces against the analytic bounds");
  bounds_cmd->add_option("run", run_dir, "Run directory")->required();
  bounds_cmd->add_option("--q", params.q, "Growth exponent q in (0,1)");
  bounds_cmd->add_option("--lambda", params.lambda, "Rate lambda > q*max(r,mu,0)");
  bounds_cmd->add_option("--a", params.a, "Shift a in {0,1}");
  bounds_cmd->add_option("--out", out, "Write the JSON report here instead of stdout");

  auto* fric_cmd = app.add_subcommand("frictionless", "Solve the frictionless baseline");
  fric_cmd->add_option("config", config_path, "JSON config")->required();
  fric_cmd->add_option("--t", times, "Time levels to write (default: 0 0.5 0.9)");
  fric_cmd->add_option("--out", out, "Output directory (default: <output_dir>/frictionless)");

  auto* export_cmd = app.add_subcommand("export", "Write figure data (regions, proportions, funding)");
  export_cmd->add_option("run", run_dir, "Run directory")->required();
  export_cmd->add_option("--out", out, "Output directory (default: <run>/figures)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*solve_cmd) return cmd_solve(config_path, out, threads);
    if (*regions_cmd) return cmd_regions(run_dir, times, out);
    if (*sim_cmd) {
      sim.threads = threads;
      return cmd_simulate(sim);
    }
    if (*bounds_cmd) return cmd_bounds(run_dir, params, out);
    if (*fric_cmd) return cmd_frictionless(config_path, out, times);
    if (*export_cmd) return cmd_export(run_dir, out);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
