#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"
#include "config.hpp"

int main(int argc, char** argv) {
  using namespace svx::cli;
  CLI::App app{"Least-energy vortex solutions: continuation sweeps, property checks, reports"};
  app.require_subcommand(1);
  app.fallthrough();

  CommandOptions opts;
  std::string out_dir;
  std::uint64_t seed = 0;
  app.add_option("--out", out_dir, "output directory (overrides the config)");
  app.add_option("--seed", seed, "seed for the property suites (overrides the config)");
  app.add_flag("--quiet", opts.quiet, "suppress progress and tables");

  std::string config_path;
  std::string report_dir;
  CLI::App* run = app.add_subcommand("run", "continuation sweep and report");
  run->add_option("config", config_path, "config JSON")->required();
  CLI::App* check = app.add_subcommand("check", "property suites on small grids");
  check->add_option("config", config_path, "config JSON")->required();
  CLI::App* report = app.add_subcommand("report", "trend table from a finished sweep");
  report->add_option("dir", report_dir, "sweep output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }
  if (app.count("--out")) opts.out = out_dir;
  if (app.count("--seed")) opts.seed = seed;

  if (report->parsed()) return report_command(report_dir, std::cout, std::cerr);

  RunConfig config;
  try {
    config = load_config(config_path);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  }
  if (run->parsed()) return run_command(config, opts, std::cout, std::cerr);
  return check_command(config, opts, std::cout, std::cerr);
}
