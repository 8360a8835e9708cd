#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "goalqvi/qvi_solver.hpp"

namespace goalqvi {

struct SimKnobs {
  std::size_t paths = 100000;
  double dt = 1e-3;
  std::uint64_t seed = 7;
};

/// Everything a run needs. JSON keys:
///   market.{r,mu,sigma}, cost.{kind,c_min,rate?}, goals:[{t,g,w}],
///   grid.{n,w_max?}, dt, solver.{penalty_rho,penalty_tol,max_iters}?,
///   sim.{paths,dt,seed}?, threads?, output_dir?
/// A missing grid.w_max means Σ G_k + c_min.
struct RunConfig {
  SolverConfig solver;
  SimKnobs sim;
  std::string output_dir = "run";
};

/// Throws ConfigError naming the offending field (e.g. "market.sigma"), or
/// the validation error of the assembled solver configuration.
RunConfig parse_config(std::string_view json_text);
RunConfig load_config(const std::filesystem::path& path);

/// Canonical JSON echo; parse_config(to_json(c)) reproduces c.
std::string to_json(const RunConfig& config);

}  // namespace goalqvi
