#include "goalqvi/config.hpp"

#include <fstream>
#include <sstream>
#include <vector>

#include "json.hpp"
#include "goalqvi/errors.hpp"

namespace goalqvi {
namespace {

using nlohmann::json;

const json& field(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object() || !obj.contains(key)) throw Error(ErrorCode::ConfigError, "missing field " + path);
  return obj.at(key);
}

double number(const json& obj, const std::string& key, const std::string& path) {
  const json& v = field(obj, key, path);
  if (!v.is_number()) throw Error(ErrorCode::ConfigError, "field " + path + " must be a number");
  return v.get<double>();
}

double number_or(const json& obj, const std::string& key, const std::string& path, double fallback) {
  return obj.is_object() && obj.contains(key) ? number(obj, key, path) : fallback;
}

long long integer(const json& obj, const std::string& key, const std::string& path) {
  const json& v = field(obj, key, path);
  if (!v.is_number_integer()) throw Error(ErrorCode::ConfigError, "field " + path + " must be an integer");
  return v.get<long long>();
}

long long integer_or(const json& obj, const std::string& key, const std::string& path, long long fallback) {
  return obj.is_object() && obj.contains(key) ? integer(obj, key, path) : fallback;
}

}  // namespace

RunConfig parse_config(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ConfigError, std::string("malformed JSON: ") + e.what());
  }
  if (!root.is_object()) throw Error(ErrorCode::ConfigError, "config must be a JSON object");

  const json& m = field(root, "market", "market");
  const MarketParams market{number(m, "r", "market.r"), number(m, "mu", "market.mu"),
                            number(m, "sigma", "market.sigma")};

  const json& c = field(root, "cost", "cost");
  const json& kind = field(c, "kind", "cost.kind");
  const double c_min = number(c, "c_min", "cost.c_min");
  if (!(c_min > 0.0)) throw Error(ErrorCode::ConfigError, "field cost.c_min must be positive");
  CostModel cost = CostModel::fixed(c_min);
  if (kind == "fixed_plus_proportional") {
    const double rate = number(c, "rate", "cost.rate");
    try {
      cost = CostModel::fixed_plus_proportional(c_min, rate);
    } catch (const Error& e) {
      throw Error(ErrorCode::ConfigError, std::string("field cost.rate: ") + e.what());
    }
  } else if (kind != "fixed") {
    throw Error(ErrorCode::ConfigError, "field cost.kind must be \"fixed\" or \"fixed_plus_proportional\"");
  }

  const json& g = field(root, "goals", "goals");
  if (!g.is_array() || g.empty()) throw Error(ErrorCode::ConfigError, "field goals must be a non-empty array");
  std::vector<Goal> goals;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const std::string p = "goals[" + std::to_string(i) + "]";
    goals.push_back({number(g[i], "t", p + ".t"), number(g[i], "g", p + ".g"), number(g[i], "w", p + ".w")});
  }
  GoalSchedule schedule(goals);

  const json& gr = field(root, "grid", "grid");
  const long long n = integer(gr, "n", "grid.n");
  if (n < 2 || n > 100000) throw Error(ErrorCode::ConfigError, "field grid.n must lie in [2, 100000]");
  const double w_max = number_or(gr, "w_max", "grid.w_max", schedule.total_target() + c_min);

  const double dt = number(root, "dt", "dt");

  const json solver = root.value("solver", json::object());
  const json sim = root.value("sim", json::object());

  RunConfig rc{SolverConfig{market, cost, schedule, GridSpec(w_max, static_cast<int>(n)), dt}, {}, "run"};
  rc.solver.penalty_rho = number_or(solver, "penalty_rho", "solver.penalty_rho", rc.solver.penalty_rho);
  rc.solver.penalty_tol = number_or(solver, "penalty_tol", "solver.penalty_tol", rc.solver.penalty_tol);
  rc.solver.max_penalty_iters =
      static_cast<int>(integer_or(solver, "max_iters", "solver.max_iters", rc.solver.max_penalty_iters));
  const long long threads = integer_or(root, "threads", "threads", 0);
  if (threads < 0) throw Error(ErrorCode::ConfigError, "field threads must be >= 0");
  rc.solver.threads = static_cast<unsigned>(threads);

  const long long paths = integer_or(sim, "paths", "sim.paths", static_cast<long long>(rc.sim.paths));
  if (paths < 1) throw Error(ErrorCode::ConfigError, "field sim.paths must be positive");
  rc.sim.paths = static_cast<std::size_t>(paths);
  rc.sim.dt = number_or(sim, "dt", "sim.dt", rc.sim.dt);
  if (!(rc.sim.dt > 0.0)) throw Error(ErrorCode::ConfigError, "field sim.dt must be positive");
  if (sim.contains("seed")) {
    if (!sim["seed"].is_number_unsigned() && !sim["seed"].is_number_integer()) {
      throw Error(ErrorCode::ConfigError, "field sim.seed must be an integer");
    }
    rc.sim.seed = sim["seed"].get<std::uint64_t>();
  }
  if (root.contains("output_dir")) {
    if (!root["output_dir"].is_string()) throw Error(ErrorCode::ConfigError, "field output_dir must be a string");
    rc.output_dir = root["output_dir"].get<std::string>();
  }

  validate(rc.solver);
  return rc;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot read config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::string to_json(const RunConfig& config) {
  const SolverConfig& s = config.solver;
  json j;
  j["market"] = {{"r", s.market.r}, {"mu", s.market.mu}, {"sigma", s.market.sigma}};
  if (s.cost.kind() == CostKind::Fixed) {
    j["cost"] = {{"kind", "fixed"}, {"c_min", s.cost.c_min()}};
  } else {
    j["cost"] = {{"kind", "fixed_plus_proportional"}, {"c_min", s.cost.c_min()}, {"rate", s.cost.rate()}};
  }
  j["goals"] = json::array();
  for (const Goal& g : s.schedule.goals()) j["goals"].push_back({{"t", g.deadline}, {"g", g.target}, {"w", g.weight}});
  j["grid"] = {{"n", s.grid.n()}, {"w_max", s.grid.w_max()}};
  j["dt"] = s.dt;
  j["solver"] = {{"penalty_rho", s.penalty_rho}, {"penalty_tol", s.penalty_tol}, {"max_iters", s.max_penalty_iters}};
  j["sim"] = {{"paths", config.sim.paths}, {"dt", config.sim.dt}, {"seed", config.sim.seed}};
  j["output_dir"] = config.output_dir;
  return j.dump(2);
}

}  // namespace goalqvi
