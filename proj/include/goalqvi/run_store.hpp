#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "goalqvi/config.hpp"
#include "goalqvi/qvi_solver.hpp"

namespace goalqvi {

/// Run directory layout:
///   config.json                       canonical config echo
///   surfaces/value_tNNNN.csv          x0,x1,value per global level
///   surfaces/post_deadline_kK.csv     V_{k+1}(T_k, ·) after funding goal k
///   policies/policy_tNNNN.csv         x0,x1,action,delta_star
///   policies/post_deadline_kK.csv     actions right after funding goal k
///   policies/funding_kK.csv           x0,x1,theta_star
///   diagnostics.json                  residuals, penalty iterations, ...
///   manifest.json                     config echo and SHA-256 of every file
/// Interior deadlines map to the pre-funding surface in the tNNNN files.
std::string level_tag(int global_level);

void write_run(const std::filesystem::path& dir, const RunConfig& config, const SolveResult& result);

struct LoadedRun {
  RunConfig config;
  SolveResult result;
};

/// Throws IoError when the directory or a file is missing or malformed.
LoadedRun load_run(const std::filesystem::path& dir);

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

/// Reads a whole file; throws IoError.
std::string read_file(const std::filesystem::path& path);
/// Writes a whole file, creating parent directories; throws IoError.
void write_file(const std::filesystem::path& path, std::string_view bytes);

}  // namespace goalqvi
