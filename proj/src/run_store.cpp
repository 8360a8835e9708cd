#include "goalqvi/run_store.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "json.hpp"
#include "goalqvi/errors.hpp"

namespace goalqvi {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string policy_csv(const Level& level, const GridSpec& grid) {
  std::string out = "x0,x1,action,delta_star\n";
  for (int i = 0; i <= grid.n(); ++i) {
    for (int j = 0; j <= grid.n() - i; ++j) {
      const NodeAction& a = level.actions[grid.index(i, j)];
      const PortfolioState x = grid.node(i, j);
      out += format_double(x.x0) + ',' + format_double(x.x1) + ',' +
             (a.kind == Action::Trade ? "trade," : "hold,") + format_double(a.kind == Action::Trade ? a.delta : 0.0) +
             '\n';
    }
  }
  return out;
}

std::string slice_csv(const Slice& slice, const GridSpec& grid) {
  std::ostringstream out;
  write_slice_csv(out, slice, grid);
  return out.str();
}

std::string funding_csv(const std::vector<double>& theta, const GridSpec& grid) {
  std::string out = "x0,x1,theta_star\n";
  for (int i = 0; i <= grid.n(); ++i) {
    for (int j = 0; j <= grid.n() - i; ++j) {
      const PortfolioState x = grid.node(i, j);
      out += format_double(x.x0) + ',' + format_double(x.x1) + ',' + format_double(theta[grid.index(i, j)]) + '\n';
    }
  }
  return out;
}

// Splits CSV rows (after the expected header) into fields.
std::vector<std::vector<std::string_view>> parse_rows(std::string_view text, std::string_view header,
                                                      const std::string& name) {
  std::vector<std::vector<std::string_view>> rows;
  std::size_t pos = text.find('\n');
  if (pos == std::string_view::npos || text.substr(0, pos) != header) {
    throw Error(ErrorCode::IoError, name + ": expected header " + std::string(header));
  }
  ++pos;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    if (line.empty()) continue;
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      fields.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    rows.push_back(std::move(fields));
  }
  return rows;
}

double to_number(std::string_view s, const std::string& name) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw Error(ErrorCode::IoError, name + ": malformed number '" + std::string(s) + "'");
  }
  return v;
}

std::vector<NodeAction> read_policy(const fs::path& path, const GridSpec& grid) {
  const std::string text = read_file(path);
  const auto rows = parse_rows(text, "x0,x1,action,delta_star", path.string());
  if (rows.size() != grid.size()) throw Error(ErrorCode::IoError, path.string() + ": wrong number of rows");
  std::vector<NodeAction> actions(grid.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != 4) throw Error(ErrorCode::IoError, path.string() + ": malformed row");
    if (rows[r][2] == "trade") {
      actions[r] = {Action::Trade, to_number(rows[r][3], path.string())};
    } else if (rows[r][2] != "hold") {
      throw Error(ErrorCode::IoError, path.string() + ": unknown action '" + std::string(rows[r][2]) + "'");
    }
  }
  return actions;
}

std::vector<double> read_funding(const fs::path& path, const GridSpec& grid) {
  const std::string text = read_file(path);
  const auto rows = parse_rows(text, "x0,x1,theta_star", path.string());
  if (rows.size() != grid.size()) throw Error(ErrorCode::IoError, path.string() + ": wrong number of rows");
  std::vector<double> theta(grid.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != 3) throw Error(ErrorCode::IoError, path.string() + ": malformed row");
    theta[r] = to_number(rows[r][2], path.string());
  }
  return theta;
}

Slice read_surface(const fs::path& path, const GridSpec& grid) {
  std::istringstream in(read_file(path));
  try {
    return read_slice_csv(in, grid);
  } catch (const Error& e) {
    throw Error(ErrorCode::IoError, path.string() + ": " + e.what());
  }
}

}  // namespace

std::string level_tag(int global_level) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "t%04d", global_level);
  return buf;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const fs::path& path, std::string_view bytes) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::IoError, "SHA-256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xF];
  }
  return out;
}

std::string sha256_file(const fs::path& path) { return sha256_hex(read_file(path)); }

void write_run(const fs::path& dir, const RunConfig& config, const SolveResult& result) {
  const GridSpec& grid = result.config.grid;
  std::map<std::string, std::string> hashes;
  const auto put = [&](const std::string& rel, const std::string& bytes) {
    write_file(dir / rel, bytes);
    hashes[rel] = sha256_hex(bytes);
  };

  put("config.json", to_json(config) + "\n");
  json residuals = json::array();
  json iterations = json::array();
  json chained = json::array();
  json times = json::array();
  const std::size_t K = result.segments.size();
  for (std::size_t k = 1; k <= K; ++k) {
    const auto& levels = result.segments[k - 1].levels;
    for (std::size_t l = 0; l < levels.size(); ++l) {
      const int level = static_cast<int>(l);
      const bool post_deadline = k > 1 && l == 0;
      const std::string tag = post_deadline ? "post_deadline_k" + std::to_string(k - 1)
                                            : level_tag(result.time.global_level(k, level));
      const std::string surface = post_deadline ? "surfaces/" + tag + ".csv" : "surfaces/value_" + tag + ".csv";
      const std::string policy = post_deadline ? "policies/" + tag + ".csv" : "policies/policy_" + tag + ".csv";
      put(surface, slice_csv(levels[l].value, grid));
      put(policy, policy_csv(levels[l], grid));
      times.push_back({{"k", k}, {"level", level}, {"t", result.time.time(k, level)}, {"file", tag}});
      residuals.push_back(levels[l].residual);
      iterations.push_back(levels[l].iterations);
      chained.push_back(levels[l].chained_targets);
    }
  }
  for (std::size_t k = 1; k < K; ++k) {
    put("policies/funding_k" + std::to_string(k) + ".csv", funding_csv(result.funding[k - 1], grid));
  }
  json diag;
  diag["levels"] = times;
  diag["residuals"] = residuals;
  diag["penalty_iters"] = iterations;
  diag["chained_targets"] = chained;
  diag["max_residual"] = result.max_residual();
  put("diagnostics.json", diag.dump(2) + "\n");

  json manifest;
  manifest["config"] = json::parse(to_json(config));
  manifest["files"] = hashes;
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

LoadedRun load_run(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorCode::IoError, "run directory " + dir.string() + " does not exist");
  RunConfig config = [&] {
    try {
      return parse_config(read_file(dir / "config.json"));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::IoError) throw;
      throw Error(ErrorCode::IoError, "run config: " + std::string(e.what()));
    }
  }();
  const SolverConfig& cfg = config.solver;
  const GridSpec& grid = cfg.grid;

  SolveResult result{cfg, build_time_segmentation(cfg.schedule, cfg.dt), {}, {}};
  const std::size_t K = cfg.schedule.size();
  result.segments.resize(K);
  result.funding.resize(K - 1);

  json diag;
  try {
    diag = json::parse(read_file(dir / "diagnostics.json"));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::IoError, std::string("diagnostics.json: ") + e.what());
  }
  const json& residuals = diag.at("residuals");
  const json& iterations = diag.at("penalty_iters");
  const json& chained = diag.at("chained_targets");

  std::size_t flat = 0;
  for (std::size_t k = 1; k <= K; ++k) {
    auto& seg = result.segments[k - 1];
    seg.goal = k;
    seg.levels.resize(static_cast<std::size_t>(result.time.segment(k).steps) + 1);
    for (std::size_t l = 0; l < seg.levels.size(); ++l, ++flat) {
      const bool post_deadline = k > 1 && l == 0;
      const std::string tag = post_deadline ? "post_deadline_k" + std::to_string(k - 1)
                                            : level_tag(result.time.global_level(k, static_cast<int>(l)));
      Level& level = seg.levels[l];
      level.value = read_surface(dir / (post_deadline ? "surfaces/" + tag + ".csv" : "surfaces/value_" + tag + ".csv"),
                                 grid);
      level.actions =
          read_policy(dir / (post_deadline ? "policies/" + tag + ".csv" : "policies/policy_" + tag + ".csv"), grid);
      if (flat < residuals.size()) {
        level.residual = residuals[flat].get<double>();
        level.iterations = iterations[flat].get<int>();
        level.chained_targets = chained[flat].get<int>();
      }
    }
  }
  for (std::size_t k = 1; k < K; ++k) {
    result.funding[k - 1] = read_funding(dir / ("policies/funding_k" + std::to_string(k) + ".csv"), grid);
  }
  return {std::move(config), std::move(result)};
}

}  // namespace goalqvi
