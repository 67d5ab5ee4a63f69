#pragma once

#include <string>
#include <vector>

#include "robin_sep/config.hpp"

namespace robin_sep {

enum ExitCode : int { exit_pass = 0, exit_config = 2, exit_numeric = 3, exit_invariant = 4 };

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct RunResult {
  int exit_code = exit_pass;
  std::vector<CheckResult> checks;
  std::vector<std::string> files;
  std::string error;
};

/// Executes the scenario and writes its artifacts to config.output_dir
/// (created if needed). The manifest is written before any other file and
/// rewritten at the end with a SHA-256 hash for every emitted file.
RunResult run(const RunConfig& config);

/// Hex SHA-256 of a file.
std::string sha256_file(const std::string& path);

/// Minimal SVG line chart: each series is (label, xs, ys).
struct Series {
  std::string label;
  std::vector<double> xs;
  std::vector<double> ys;
};
std::string svg_line_chart(const std::string& title, const std::string& x_label,
                           const std::string& y_label, const std::vector<Series>& series,
                           bool log_y = false);

}  // namespace robin_sep
