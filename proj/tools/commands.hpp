#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "config.hpp"

namespace svx::cli {

enum ExitCode : int { kOk = 0, kConfigError = 1, kSolveFailure = 2 };

struct CommandOptions {
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

/// Continuation sweep; writes field_eps_<k>.csv, trace_eps_<k>.jsonl,
/// report.json and report.csv (and operator.mtx on request) into the output dir.
int run_command(const RunConfig& config, const CommandOptions& opts, std::ostream& out,
                std::ostream& err);

/// Property suites; exit 0 iff every enabled check passes.
int check_command(const RunConfig& config, const CommandOptions& opts, std::ostream& out,
                  std::ostream& err);

/// Recomputes trends from dir/report.json and prints the comparison table.
int report_command(const std::string& dir, std::ostream& out, std::ostream& err);

} // namespace svx::cli
