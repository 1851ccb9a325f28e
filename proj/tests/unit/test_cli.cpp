#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

#include <doctest.h>

#include "checks.hpp"
#include "commands.hpp"
#include "config.hpp"
#include "svx/report_io.hpp"

using namespace svx::cli;
namespace fs = std::filesystem;

namespace {

const char* minimal = R"({
  "scenario": "lake",
  "depth": {"kind": "constant", "value": 1.0},
  "kappa": 6.283185307179586,
  "epsilons": [0.5],
  "resolution": 16
})";

class TempDir {
public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("svx-cli-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }

private:
  fs::path path_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

struct Captured {
  int code;
  std::string out;
  std::string err;
};

Captured run(const RunConfig& c, const fs::path& out_dir, bool quiet = false) {
  CommandOptions opts;
  opts.out = out_dir.string();
  opts.quiet = quiet;
  std::ostringstream out;
  std::ostringstream err;
  const int code = run_command(c, opts, out, err);
  return {code, out.str(), err.str()};
}

int binary(const std::string& args) {
  const std::string cmd = std::string(SVX_CLI_BINARY) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

} // namespace

TEST_SUITE("cli") {

TEST_CASE("config: minimal lake parses") {
  const RunConfig c = parse_config(minimal);
  CHECK(c.scenario == "lake");
  CHECK(c.epsilons.size() == 1);
  CHECK(c.n1 == 16);
  CHECK(c.n2 == 16);
  CHECK(c.spec.profile({0.5, 0.5}) == doctest::Approx(1.0));
}

TEST_CASE("config: errors name the offending field") {
  const auto field_of = [](const std::string& text) {
    try {
      parse_config(text);
    } catch (const ConfigError& e) {
      return e.field();
    }
    return std::string("<none>");
  };
  CHECK(field_of(R"({"scenario": "lake", "depth": {"kind": "constant", "value": 1}, "kappa": 1,
                     "epsilons": [0.1, 0.2]})") == "epsilons");
  CHECK(field_of(R"({"scenario": "lake", "depth": {"kind": "constant", "value": 1}, "kappa": 1,
                     "epsilons": [0.1], "resolution": 4})") == "resolution");
  CHECK(field_of(R"({"scenario": "ring_whole_space", "W": -1, "kappa": 1, "epsilons": [0.1]})") == "W");
  CHECK(field_of(R"({"scenario": "lake", "depth": {"kind": "constant", "value": 1}, "kappa": 1,
                     "epsilons": [0.1], "solver": {"tol": "x"}})") == "solver.tol");
  CHECK(field_of(R"({"scenario": "lake", "depth": {"kind": "constant", "value": 1}, "kappa": 1,
                     "epsilons": [0.1], "bogus": 1})") == "bogus");
  CHECK(field_of(R"({"scenario": "volcano", "epsilons": [0.1]})") == "scenario");
  CHECK(field_of("[1, 2") == "config");

  try {
    parse_config(R"({"scenario": "lake", "depth": {"kind": "constant", "value": 1}, "kappa": 1,
                     "epsilons": [0.1, 0.2]})");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("epsilons") == 0);
  }
}

TEST_CASE("run: minimal lake writes a one-row report") {
  TempDir dir;
  const Captured r = run(parse_config(minimal), dir.path() / "out");
  CHECK(r.code == kOk);
  CHECK(r.err.empty());
  const svx::AsymptoticsReport rep = svx::report_from_json(slurp(dir.path() / "out" / "report.json"));
  CHECK(rep.rows.size() == 1);
  CHECK(fs::exists(dir.path() / "out" / "report.csv"));
  CHECK(fs::exists(dir.path() / "out" / "field_eps_0.csv"));
  CHECK(fs::exists(dir.path() / "out" / "trace_eps_0.jsonl"));
  CHECK(slurp(dir.path() / "out" / "field_eps_0.csv").rfind("x1,x2,u,psi,vorticity\n", 0) == 0);
  for (const auto& e : fs::directory_iterator(dir.path() / "out"))
    CHECK(e.path().filename().string().find(".tmp") == std::string::npos);
}

TEST_CASE("run: operator dump on request") {
  TempDir dir;
  RunConfig c = parse_config(minimal);
  c.write_operator = true;
  CHECK(run(c, dir.path(), true).code == kOk);
  CHECK(slurp(dir.path() / "operator.mtx").rfind("%%MatrixMarket", 0) == 0);
}

TEST_CASE("run: unwritable output leaves nothing behind") {
  TempDir dir;
  write_text(dir.path() / "blocker", "file, not a directory");
  const Captured r = run(parse_config(minimal), dir.path() / "blocker" / "out");
  CHECK(r.code == kConfigError);
  CHECK(r.err.find("output") != std::string::npos);
  std::size_t entries = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir.path())) ++entries;
  CHECK(entries == 1);
}

TEST_CASE("run: a solve failure exits 2 and still writes the report") {
  TempDir dir;
  RunConfig c = parse_config(minimal);
  c.solver.max_iterations = 1;
  c.solver.tol = 1e-14;
  const Captured r = run(c, dir.path(), true);
  CHECK(r.code == kSolveFailure);
  CHECK(fs::exists(dir.path() / "report.json"));
}

TEST_CASE("check: default seed passes, corrupted gradient fails") {
  RunConfig c = parse_config(minimal);
  CommandOptions opts;
  opts.quiet = true;
  std::ostringstream out;
  std::ostringstream err;
  CHECK(check_command(c, opts, out, err) == kOk);
  c.hooks.corrupt_gradient = true;
  const std::vector<CheckResult> res = run_checks(c, c.seed);
  for (const auto& r : res)
    if (r.name == "gradient") CHECK_FALSE(r.passed);
  CHECK(check_command(c, opts, out, err) != kOk);
}

TEST_CASE("check: pass set does not depend on the seed") {
  const RunConfig c = parse_config(minimal);
  std::vector<std::vector<bool>> sets;
  for (std::uint64_t seed : {1u, 7u, 12345u}) {
    std::vector<bool> s;
    for (const auto& r : run_checks(c, seed)) s.push_back(r.passed);
    sets.push_back(s);
  }
  CHECK(sets[0] == sets[1]);
  CHECK(sets[0] == sets[2]);
}

TEST_CASE("report: reproduces the in-run table, rejects empty dirs, flags short sweeps") {
  TempDir dir;
  RunConfig c = parse_config(R"({
    "scenario": "lake",
    "depth": {"kind": "gaussian", "base": 1.0, "amplitude": 1.0, "center": [0.35, 0.5], "width": 1.0},
    "kappa": 6.283185307179586,
    "epsilons": [0.3, 0.2],
    "resolution": 24
  })");
  const Captured r = run(c, dir.path() / "sweep");
  REQUIRE(r.code == kOk);
  std::ostringstream out;
  std::ostringstream err;
  CHECK(report_command((dir.path() / "sweep").string(), out, err) == kOk);
  CHECK(r.out.find(out.str()) != std::string::npos);
  CHECK(out.str().find("insufficient points") != std::string::npos);

  fs::create_directories(dir.path() / "empty");
  CHECK(report_command((dir.path() / "empty").string(), out, err) == kConfigError);
  write_text(dir.path() / "empty" / "report.json", "{\"format\": 3");
  CHECK(report_command((dir.path() / "empty").string(), out, err) == kConfigError);
}

TEST_CASE("binary: exit codes") {
  TempDir dir;
  write_text(dir.path() / "ok.json", minimal);
  write_text(dir.path() / "bad.json", R"({"scenario": "lake", "depth": {"kind": "constant", "value": 1},
                                          "kappa": 1, "epsilons": [0.1, 0.2]})");
  const std::string out = (dir.path() / "run").string();
  CHECK(binary("run " + (dir.path() / "ok.json").string() + " --out " + out + " --quiet") == 0);
  CHECK(binary("--quiet report " + out) == 0);
  CHECK(binary("run " + (dir.path() / "bad.json").string() + " --out " + out) == 1);
  CHECK(binary("run " + (dir.path() / "missing.json").string()) == 1);
  CHECK(binary("report " + (dir.path() / "nowhere").string()) == 1);
  CHECK(binary("frobnicate") == 1);
  CHECK(binary("check " + (dir.path() / "ok.json").string() + " --seed 3 --quiet") == 0);
}

} // TEST_SUITE
