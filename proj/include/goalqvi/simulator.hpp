#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "goalqvi/market.hpp"
#include "goalqvi/policy.hpp"

namespace goalqvi {

struct SimConfig {
  std::size_t n_paths = 100000;
  double dt_sim = 1e-3;
  std::uint64_t seed = 7;
  PortfolioState initial;
  double start_time = 0.0;
  unsigned threads = 1;
};

struct SimResult {
  std::size_t n_paths = 0;
  double mean_objective = 0.0;
  double std_error = 0.0;
  double mean_trades = 0.0;
  double mean_total_cost_paid = 0.0;
  std::vector<double> per_goal_mean_shortfall;  // mean (G_k − θ_k)⁺
  std::size_t capped_paths = 0;                 // paths that hit the trade cap
};

/// x1·exp((μ − σ²/2)dt + σ√dt·z).
double gbm_step(double x1, double dt, double z, const MarketParams& market) noexcept;

/// x0·exp(r·dt).
double bank_step(double x0, double dt, const MarketParams& market) noexcept;

struct TraceEvent {
  double t = 0.0;
  PortfolioState x;  // state after the event
  std::string event;  // "start", "trade", "fund", "end"
  double amount = 0.0;
};

struct PathOutcome {
  double objective = 0.0;
  int trades = 0;
  double cost_paid = 0.0;
  std::vector<double> shortfall;
  bool capped = false;
};

/// Runs one path; the random stream depends only on (seed, path).
PathOutcome simulate_path(const Policy& policy, const SimConfig& config, std::uint64_t path,
                          std::vector<TraceEvent>* trace = nullptr);

/// Throws InvalidArgument for a bad state or misaligned dt_sim and
/// IncompatiblePolicy when the policy's surfaces do not match its grid.
SimResult simulate(const Policy& policy, const SimConfig& config);

struct ValueComparison {
  double sim_mean = 0.0;
  double std_error = 0.0;
  double pde_value = 0.0;
  double gap = 0.0;        // |sim_mean − pde_value|
  double gap_sigma = 0.0;  // gap / std_error (inf when std_error = 0 and gap > 0)
  double tolerance = 0.0;  // max(3·std_error, 0.05)
  bool passed = false;
};

ValueComparison compare_to_value(const SimResult& sim, double pde_value);

std::string to_json(const SimResult& sim, const ValueComparison& comparison);

void write_trace_csv(std::ostream& out, const std::vector<TraceEvent>& trace);

}  // namespace goalqvi
