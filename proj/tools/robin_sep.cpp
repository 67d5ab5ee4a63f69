#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "robin_sep/config.hpp"
#include "robin_sep/run.hpp"

int main(int argc, char** argv) {
  using namespace robin_sep;
  CLI::App app{"Simple exclusion with weak Robin reservoirs: simulation, PDE and rate-function tools"};
  std::string scenario;
  std::string config_path;
  std::string out_dir;
  unsigned jobs = 0;
  app.add_option("scenario", scenario,
                 "simulate | hydro | controlled | spectral | rate | hydro-limit | entropy | rare-event")
      ->required();
  app.add_option("--config,-c", config_path, "INI configuration file")->required();
  app.add_option("--out,-o", out_dir, "output directory (default $ROBIN_SEP_OUT/<scenario>)");
  app.add_option("--jobs,-j", jobs, "worker threads for replica loops");
  app.allow_extras();
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_config;
  }

  std::vector<std::string> overrides;
  for (const auto& extra : app.remaining()) {
    if (extra.rfind("--", 0) != 0 || extra.find('=') == std::string::npos) {
      std::cerr << "error: expected --key=value override, got '" << extra << "'\n";
      return exit_config;
    }
    overrides.push_back(extra.substr(2));
  }
  overrides.push_back("run.scenario=" + scenario);
  if (jobs > 0) overrides.push_back("run.jobs=" + std::to_string(jobs));
  if (!out_dir.empty()) overrides.push_back("output.dir=" + out_dir);

  RunConfig config;
  try {
    config = parse_config_file(config_path, overrides);
  } catch (const ConfigError& e) {
    nlohmann::ordered_json err{{"status", "config_error"}, {"message", e.what()}, {"line", e.line()},
                               {"column", e.column()}};
    std::cerr << config_path << ": " << e.what() << '\n';
    std::cout << err.dump() << '\n';
    return exit_config;
  }
  if (config.output_dir.empty()) {
    const char* root = std::getenv("ROBIN_SEP_OUT");
    config.output_dir = (std::filesystem::path(root ? root : "robin-sep-out") / scenario_name(config.scenario)).string();
  }

  const auto result = run(config);
  nlohmann::ordered_json report;
  report["scenario"] = scenario_name(config.scenario);
  report["exit_code"] = result.exit_code;
  report["output_dir"] = config.output_dir;
  auto& checks = report["checks"] = nlohmann::ordered_json::array();
  for (const auto& c : result.checks) checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  if (!result.error.empty()) report["error"] = result.error;
  std::cout << report.dump(2) << '\n';
  return result.exit_code;
}
