#pragma once

// Command-line front end: `irgof <command> [input] [options]`.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "irgof/estimation.hpp"

namespace irgof {

enum class Command { Test, Simulate, Estimate, Image };

std::string to_string(Command command);

struct RunConfig {
  Command command = Command::Test;
  std::string input;
  std::string null_name = "gaussian";
  double alpha = 0.05;
  /// Empty selects the default cross-validation grid.
  std::vector<double> cv_grid;
  double floor = kDefaultDensityFloor;
  Eigen::Index scan_grid = 4096;
  std::uint64_t seed = 20240101;
  /// 0 uses every hardware thread.
  std::size_t threads = 0;

  std::string out;
  std::string trace_out;
  std::string qq_out;
  std::string error_json;
  std::string data_out;
  std::string residuals_out;
  std::string fitted_out;

  // simulate
  std::vector<std::string> errors{"normal"};
  std::vector<Eigen::Index> sample_sizes{100};
  int reps = 200;
  std::string design = "uniform";
  std::string distortion = "laplace-product";

  // image
  Eigen::Index row0 = 0;
  Eigen::Index col0 = 0;
  Eigen::Index size = 32;

  // estimate: evaluation points per axis for the exported fit
  Eigen::Index grid = 32;
};

/// Checks value ranges and that input/output paths are usable, before any
/// computation. Raises a Config or Io error.
void validate(const RunConfig& config);

/// Result of argument parsing: either a config or text to print (help,
/// version) with the exit status to use.
struct ParseOutcome {
  std::optional<RunConfig> config;
  std::string message;
  int exit_status = 0;
};

/// Flags may also come from `--config FILE` holding `key=value` lines with
/// the flag names as keys; flags on the command line take precedence.
ParseOutcome parse_command_line(int argc, const char* const* argv);

/// Exit status 0 iff no error, whatever the test decision.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace irgof
