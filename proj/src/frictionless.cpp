#include "goalqvi/frictionless.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "goalqvi/errors.hpp"

namespace goalqvi {
namespace {

constexpr int kMaxPolicyIterations = 100;
constexpr double kPiTieTol = 1e-12;

// Coefficients of the discrete generator at node i for proportion π:
// L U_i = lo·(U_{i−1} − U_i) + up·(U_{i+1} − U_i).
struct Stencil {
  double lo;
  double up;
};

Stencil stencil(const FrictionlessConfig& cfg, int i, double pi) {
  const double w = i * (cfg.w_max / cfg.n);
  const double dx = cfg.w_max / cfg.n;
  const double drift = (cfg.market.r + pi * (cfg.market.mu - cfg.market.r)) * w;
  const double diff = 0.5 * cfg.market.sigma * cfg.market.sigma * pi * pi * w * w / (dx * dx);
  return {diff + std::max(-drift, 0.0) / dx, diff + std::max(drift, 0.0) / dx};
}

// (I − dt·L_π) U = rhs with Dirichlet ends.
std::vector<double> implicit_solve(const FrictionlessConfig& cfg, const std::vector<double>& pi,
                                   const std::vector<double>& rhs, double left, double right) {
  const int n = cfg.n;
  std::vector<double> a(n + 1, 0.0), b(n + 1, 1.0), c(n + 1, 0.0), d(rhs);
  d[0] = left;
  d[n] = right;
  for (int i = 1; i < n; ++i) {
    const Stencil s = stencil(cfg, i, pi[i]);
    a[i] = -cfg.dt * s.lo;
    c[i] = -cfg.dt * s.up;
    b[i] = 1.0 + cfg.dt * (s.lo + s.up);
  }
  for (int i = 1; i <= n; ++i) {
    const double m = a[i] / b[i - 1];
    b[i] -= m * c[i - 1];
    d[i] -= m * d[i - 1];
  }
  std::vector<double> u(n + 1);
  u[n] = d[n] / b[n];
  for (int i = n - 1; i >= 0; --i) u[i] = (d[i] - c[i] * u[i + 1]) / b[i];
  return u;
}

// argmin over the π grid of L_π U at node i, smallest π among ties.
double best_pi(const FrictionlessConfig& cfg, const std::vector<double>& u, int i) {
  double best = 0.0;
  double best_val = 0.0;
  for (int p = 0; p < cfg.pi_points; ++p) {
    const double pi = static_cast<double>(p) / (cfg.pi_points - 1);
    const Stencil s = stencil(cfg, i, pi);
    const double val = s.lo * (u[i - 1] - u[i]) + s.up * (u[i + 1] - u[i]);
    if (p == 0 || val < best_val - kPiTieTol) {
      best_val = val;
      best = pi;
    }
  }
  return best;
}

FrictionlessLevel time_step(const FrictionlessConfig& cfg, const std::vector<double>& next, double corner,
                            const std::vector<double>& pi_guess) {
  const int n = cfg.n;
  FrictionlessLevel level;
  level.pi_star = pi_guess;
  level.value = implicit_solve(cfg, level.pi_star, next, corner, 0.0);
  for (int it = 1; it <= kMaxPolicyIterations; ++it) {
    std::vector<double> pi(n + 1, 0.0);
    for (int i = 1; i < n; ++i) pi[i] = best_pi(cfg, level.value, i);
    level.iterations = it;
    if (pi == level.pi_star) break;
    level.pi_star = std::move(pi);
    level.value = implicit_solve(cfg, level.pi_star, next, corner, 0.0);
  }
  return level;
}

double interp(const std::vector<double>& u, double dx, double w) {
  const int n = static_cast<int>(u.size()) - 1;
  const double pos = std::clamp(w / dx, 0.0, static_cast<double>(n));
  const int i = std::min(static_cast<int>(pos), n - 1);
  const double f = pos - i;
  return u[i] + f * (u[i + 1] - u[i]);
}

}  // namespace

const FrictionlessLevel& FrictionlessResult::level(std::size_t k, int l) const {
  if (k < 1 || k > segments.size() || l < 0 || static_cast<std::size_t>(l) >= segments[k - 1].size()) {
    throw Error(ErrorCode::UnknownTimeLevel, "frictionless level (" + std::to_string(k) + ", " + std::to_string(l) +
                                                 ") does not exist");
  }
  return segments[k - 1][static_cast<std::size_t>(l)];
}

double FrictionlessResult::value(std::size_t k, int l, double w) const { return interp(level(k, l).value, dx(), w); }

FrictionlessResult solve_frictionless(const FrictionlessConfig& config) {
  validate(config.market);
  if (config.n < 2 || !(config.w_max > 0.0)) throw Error(ErrorCode::InvalidArgument, "wealth grid needs n >= 2, w_max > 0");
  if (config.pi_points < 2) throw Error(ErrorCode::InvalidArgument, "pi grid needs at least the points 0 and 1");

  FrictionlessResult result{config, build_time_segmentation(config.schedule, config.dt), {}, {}};
  const std::size_t K = config.schedule.size();
  const int n = config.n;
  const double dx = config.w_max / n;
  result.segments.resize(K);
  result.funding.resize(K - 1);

  std::vector<double> data(n + 1);
  const Goal& last = config.schedule.goal(K);
  for (int i = 0; i <= n; ++i) data[i] = last.weight * std::max(last.target - i * dx, 0.0);

  for (std::size_t k = K; k >= 1; --k) {
    const int steps = result.time.segment(k).steps;
    auto& levels = result.segments[k - 1];
    levels.resize(static_cast<std::size_t>(steps) + 1);
    const double corner = residual_weighted_targets(config.schedule, k);

    if (k < K) {
      // Deadline: U_k(T_k, w) = min_θ w_k (G_k − θ)⁺ + U_{k+1}(T_k, w − θ).
      const Goal& goal = config.schedule.goal(k);
      const std::vector<double>& next = result.segments[k].front().value;
      std::vector<double> theta(n + 1, 0.0);
      for (int i = 0; i <= n; ++i) {
        const double w = i * dx;
        double best = std::numeric_limits<double>::infinity();
        double best_theta = w;
        const auto consider = [&](double th) {
          th = std::clamp(th, 0.0, w);
          const double v = goal.weight * std::max(goal.target - th, 0.0) + interp(next, dx, w - th);
          if (v < best - 1e-12 || (std::abs(v - best) <= 1e-12 && th < best_theta)) {
            best = v;
            best_theta = th;
          }
        };
        consider(0.0);
        consider(std::min(goal.target, w));
        consider(w);
        for (int m = 0; m <= i; ++m) consider(m * dx);
        data[i] = best;
        theta[i] = best_theta;
      }
      result.funding[k - 1] = std::move(theta);
    }
    data[0] = corner;
    levels[static_cast<std::size_t>(steps)] = {data, std::vector<double>(n + 1, 0.0), 0};
    std::vector<double> pi_guess(n + 1, 0.0);
    for (int l = steps - 1; l >= 0; --l) {
      levels[static_cast<std::size_t>(l)] = time_step(config, levels[static_cast<std::size_t>(l) + 1].value, corner, pi_guess);
      pi_guess = levels[static_cast<std::size_t>(l)].pi_star;
    }
    // π at the stored deadline level: the control just before T_k.
    levels[static_cast<std::size_t>(steps)].pi_star = steps > 0 ? levels[static_cast<std::size_t>(steps) - 1].pi_star
                                                                 : std::vector<double>(n + 1, 0.0);
    data = levels.front().value;
  }
  return result;
}

std::vector<std::pair<double, double>> v_shape_profile(const FrictionlessResult& result, double t) {
  const TimeSegment& seg = result.time.segment(1);
  const int l = static_cast<int>(std::clamp(std::round((t - seg.start) / result.time.dt()), 0.0,
                                            static_cast<double>(seg.steps)));
  const FrictionlessLevel& level = result.level(1, l);
  std::vector<std::pair<double, double>> out;
  for (int i = 0; i <= result.config.n; ++i) out.emplace_back(result.wealth(i), level.pi_star[i]);
  return out;
}

void write_frictionless_csv(std::ostream& out, const FrictionlessResult& result, std::size_t k, int l) {
  const FrictionlessLevel& level = result.level(k, l);
  out << "w,value,pi_star\n";
  for (int i = 0; i <= result.config.n; ++i) {
    out << format_double(result.wealth(i)) << ',' << format_double(level.value[i]) << ','
        << format_double(level.pi_star[i]) << '\n';
  }
}

void write_frictionless_funding_csv(std::ostream& out, const FrictionlessResult& result, std::size_t k) {
  if (k < 1 || k > result.funding.size()) {
    throw Error(ErrorCode::InvalidArgument, "no interior deadline " + std::to_string(k));
  }
  out << "w,theta_star\n";
  for (int i = 0; i <= result.config.n; ++i) {
    out << format_double(result.wealth(i)) << ',' << format_double(result.funding[k - 1][i]) << '\n';
  }
}

}  // namespace goalqvi
