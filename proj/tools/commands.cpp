#include "commands.hpp"

#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "checks.hpp"
#include "svx/diagnostics.hpp"
#include "svx/error.hpp"
#include "svx/report_io.hpp"

namespace svx::cli {

namespace fs = std::filesystem;

namespace {

// Creates the directory and proves it writable before any long computation.
bool prepare_output(const fs::path& dir, std::ostream& err) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    err << "error: output: cannot create directory " << dir.string() << '\n';
    return false;
  }
  const fs::path probe = dir / ".svx-write-probe";
  try {
    write_file_atomic(probe, "");
  } catch (const Error&) {
    err << "error: output: directory " << dir.string() << " is not writable\n";
    return false;
  }
  fs::remove(probe, ec);
  return true;
}

} // namespace

int run_command(const RunConfig& config, const CommandOptions& opts, std::ostream& out,
                std::ostream& err) {
  const fs::path dir = opts.out ? fs::path(*opts.out) : fs::path(config.output);
  std::optional<DiscreteProblem> problem;
  try {
    problem.emplace(config.spec, Grid::create(config.spec.geometry, config.n1, config.n2));
  } catch (const std::exception& e) {
    err << "error: scenario: " << e.what() << '\n';
    return kConfigError;
  }
  if (!prepare_output(dir, err)) return kConfigError;

  const TargetPrediction target = predicted_target(config.spec, problem->grid());
  std::vector<AsymptoticsRow> rows;
  bool failed = false;
  std::size_t index = 0;
  auto on_solved = [&](const DiscreteProblem& pk, const SolveResult& res) {
    const std::string tag = std::to_string(index++);
    write_file_atomic(dir / ("field_eps_" + tag + ".csv"), solution_to_csv(pk, res.u));
    write_file_atomic(dir / ("trace_eps_" + tag + ".jsonl"), trace_to_jsonl(res.trace));
    if (!opts.quiet)
      out << "eps " << format_double(res.epsilon) << ": " << to_string(res.status) << " after "
          << res.iterations << " iterations, energy " << format_double(res.energy.total) << '\n';
    try {
      rows.push_back(energy_report(pk, res, target));
    } catch (const EmptyCore&) {
      err << "error: eps " << format_double(res.epsilon) << ": solution has an empty core\n";
      failed = true;
    }
    if (!res.converged) failed = true;
  };
  try {
    if (config.write_operator) {
      std::ostringstream mtx;
      write_matrix_market(mtx, problem->op());
      write_file_atomic(dir / "operator.mtx", mtx.str());
    }
    try {
      continuation(*problem, config.epsilons, config.solver, config.center, on_solved);
    } catch (const Error& e) {
      err << "error: solve: " << e.what() << '\n';
      failed = true;
    } catch (const std::invalid_argument& e) {
      err << "error: solve: " << e.what() << '\n';
      failed = true;
    }
    if (rows.size() < config.epsilons.size()) failed = true;
    const AsymptoticsReport report = build_report(config.scenario, target, rows);
    write_file_atomic(dir / "report.json", report_to_json(report));
    write_file_atomic(dir / "report.csv", report_to_csv(report));
    if (!opts.quiet) out << comparison_table(report);
  } catch (const Error& e) {
    err << "error: output: " << e.what() << '\n';
    return kConfigError;
  }
  return failed ? kSolveFailure : kOk;
}

int check_command(const RunConfig& config, const CommandOptions& opts, std::ostream& out,
                  std::ostream& err) {
  std::vector<CheckResult> results;
  try {
    results = run_checks(config, opts.seed.value_or(config.seed));
  } catch (const std::exception& e) {
    err << "error: check: " << e.what() << '\n';
    return kConfigError;
  }
  bool all = true;
  for (const auto& r : results) all = all && r.passed;
  if (!opts.quiet) out << check_table(results);
  return all ? kOk : kSolveFailure;
}

int report_command(const std::string& dir, std::ostream& out, std::ostream& err) {
  const fs::path path = fs::path(dir) / "report.json";
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    err << "error: report: cannot read " << path.string() << '\n';
    return kConfigError;
  }
  std::ostringstream text;
  text << in.rdbuf();
  try {
    out << comparison_table(report_from_json(text.str()));
  } catch (const Error& e) {
    err << "error: report: " << e.what() << '\n';
    return kConfigError;
  }
  return kOk;
}

} // namespace svx::cli
