#pragma once

#include "ivobs/io.hpp"
#include "ivobs/systems.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace ivobs {

inline constexpr const char* kVersion = IVOBS_VERSION;

/// Exit codes shared by every command.
enum ExitCode : int { kExitOk = 0, kExitNegative = 1, kExitUsage = 2 };

/**
 * Effective configuration of one run. Defaults:
 *   dwell          taken from the system file
 *   backend        handelman
 *   degree         4, raised by 2 up to max_degree (10) until feasible
 *   grid_points    20 (grid backend)
 *   eps            1e-3
 *   seed           1
 *   horizon        20
 *   step           0 = min(smallest dwell gap / 200, 1e-2)
 *   out            current directory
 *   gains          <out>/gains.json (simulate)
 */
struct RunConfig {
  std::string command;
  std::filesystem::path system;
  std::optional<std::string> dwell;  // "range:TMIN:TMAX" or "min:TBAR"
  std::string backend = "handelman";
  int degree = 4;
  int max_degree = 10;
  int grid_points = 20;
  double eps = 1e-3;
  std::uint64_t seed = 1;
  double horizon = 20.0;
  double step = 0.0;
  std::filesystem::path out = ".";
  std::optional<std::filesystem::path> gains;
  bool collapse_bounds = false;  // simulate: bounds equal to the true inputs and state
};

Json config_to_json(const RunConfig& cfg);

/// Parses "range:TMIN:TMAX" / "min:TBAR"; throws std::invalid_argument.
DwellSpec parse_dwell(const std::string& text);

/// Writes certify_report.json.
int cmd_certify(const RunConfig& cfg);
/// Writes design_report.json, and gains.json when the design verifies.
int cmd_synthesize(const RunConfig& cfg);
/// Writes trajectory.csv and framing_report.json.
int cmd_simulate(const RunConfig& cfg);
/// Reads a switched or sampled-data description and writes lifted_system.json.
int cmd_lift(const RunConfig& cfg);

/// Dispatches on cfg.command.
int run_command(const RunConfig& cfg);

/// Full command-line entry point (argument parsing included).
int cli_main(int argc, const char* const* argv);

}  // namespace ivobs
