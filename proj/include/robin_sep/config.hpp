#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "robin_sep/params.hpp"
#include "robin_sep/pde.hpp"
#include "robin_sep/tilt_field.hpp"

namespace robin_sep {

/// Configuration error with an optional source position (1-based).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& message, int line = 0, int column = 0);
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

enum class Scenario { simulate, hydro, controlled, spectral, rate, hydro_limit, entropy, rare_event };

Scenario parse_scenario(const std::string& name);
std::string scenario_name(Scenario s);

struct FieldSpec {
  /// zero | affine | sine | tabulated
  std::string kind = "zero";
  double slope = 0.0;
  double amplitude = 0.0;
  int mode = 1;
  /// Linear ramp-in time (0 = none), applied to affine and sine.
  double ramp = 0.0;
  std::string path;

  FieldPtr build() const;
  std::string describe() const;
};

struct RunConfig {
  Scenario scenario = Scenario::hydro;
  ReservoirParams params;

  // [grid]
  std::size_t space_intervals = 512;
  std::size_t time_steps = 2048;
  std::size_t modes = 128;
  std::size_t time_hats = 33;
  std::size_t cosine_modes = 12;

  // [run]
  double horizon = 0.2;
  std::uint64_t seed = 1;
  std::size_t replicas = 20;
  int n_scale = 64;
  std::vector<int> scales{64, 128, 256};
  double epsilon = 0.05;
  /// stationary | step | const:<v> | sine:<amplitude>
  std::string gamma = "stationary";
  double ball_radius = 0.05;
  unsigned jobs = 1;

  FieldSpec field;
  /// Proposal field for rare_event (defaults to the target field).
  std::optional<FieldSpec> proposal;

  // [output]
  std::string output_dir;
  bool figures = true;

  Profile initial_profile() const;
  PdeGrid grid() const { return {space_intervals, time_steps, 1}; }
  /// Canonical key = value rendering (sections in fixed order).
  std::string canonical() const;
};

/// Parses INI text. Section-qualified overrides ("section.key=value") or bare
/// keys that are unique across sections are applied after the file. Unknown
/// sections or keys, malformed lines and violated invariants throw
/// ConfigError.
RunConfig parse_config(const std::string& text, const std::vector<std::string>& overrides = {},
                       const std::string& source = "<config>");
RunConfig parse_config_file(const std::string& path,
                            const std::vector<std::string>& overrides = {});

}  // namespace robin_sep
