#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "svx/model.hpp"
#include "svx/solver.hpp"

namespace svx::cli {

/// Validation failure; `field` names the offending config key.
class ConfigError : public std::runtime_error {
public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

private:
  std::string field_;
};

struct CheckToggles {
  bool gradient = true;
  bool lower_bound = true;
  bool nehari = true;
  bool hardy = true;
  bool identities = true;
  int samples = 20;  ///< random fields per suite
};

struct TestHooks {
  bool corrupt_gradient = false;
};

struct RunConfig {
  std::string scenario;  ///< lake, ring_whole_space, ring_cylinder, ring_outside_ball
  ProblemSpec spec;      ///< epsilon set to the first entry of `epsilons`
  std::vector<double> epsilons;
  int n1 = 64;
  int n2 = 64;
  SolverOptions solver;
  std::optional<Point> center;
  std::string output = "out";
  std::uint64_t seed = 1;
  CheckToggles checks;
  TestHooks hooks;
  bool write_operator = false;
};

/// Parses and validates a config document; throws ConfigError.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

} // namespace svx::cli
