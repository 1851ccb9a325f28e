#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "config.hpp"

namespace svx::cli {

struct CheckResult {
  std::string name;
  bool passed = false;
  int cases = 0;
  double worst = 0.0;      ///< worst measured value over the cases
  double threshold = 0.0;  ///< bound the worst value is compared against
  std::string note;
};

/// Property suites on small grids of the configured scenario.
std::vector<CheckResult> run_checks(const RunConfig& config, std::uint64_t seed);

/// Fixed-width pass/fail table.
std::string check_table(const std::vector<CheckResult>& results);

} // namespace svx::cli
