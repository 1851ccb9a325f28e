#include "config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <json.hpp>

namespace svx::cli {

namespace {

using nlohmann::json;

void allow_keys(const json& j, const std::string& where, const std::set<std::string>& keys) {
  for (const auto& [key, value] : j.items())
    if (!keys.count(key)) throw ConfigError(where.empty() ? key : where + "." + key, "unknown key");
}

double number(const json& j, const std::string& key, const std::string& where) {
  const std::string field = where.empty() ? key : where + "." + key;
  if (!j.contains(key)) throw ConfigError(field, "missing");
  const json& v = j.at(key);
  if (!v.is_number()) throw ConfigError(field, "must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(field, "must be finite");
  return x;
}

double number_or(const json& j, const std::string& key, const std::string& where, double fallback) {
  return j.contains(key) ? number(j, key, where) : fallback;
}

int integer_or(const json& j, const std::string& key, const std::string& where, int fallback) {
  if (!j.contains(key)) return fallback;
  const std::string field = where.empty() ? key : where + "." + key;
  const json& v = j.at(key);
  if (!v.is_number_integer()) throw ConfigError(field, "must be an integer");
  return v.get<int>();
}

bool flag_or(const json& j, const std::string& key, const std::string& where, bool fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_boolean()) throw ConfigError(where.empty() ? key : where + "." + key, "must be a boolean");
  return v.get<bool>();
}

Point point(const json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw ConfigError(field, "must be a two-element array of numbers");
  return {j[0].get<double>(), j[1].get<double>()};
}

Rect rect(const json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 4)
    throw ConfigError(field, "must be [x1_min, x1_max, x2_min, x2_max]");
  for (const auto& v : j)
    if (!v.is_number()) throw ConfigError(field, "entries must be numbers");
  Rect r{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
  if (!(r.x1_max > r.x1_min && r.x2_max > r.x2_min)) throw ConfigError(field, "empty rectangle");
  return r;
}

WeightProfile depth(const json& j) {
  if (!j.is_object()) throw ConfigError("depth", "must be an object");
  const std::string kind = j.value("kind", "");
  if (kind == "constant") {
    allow_keys(j, "depth", {"kind", "value"});
    return ConstantDepth{number(j, "value", "depth")};
  }
  if (kind == "gaussian") {
    allow_keys(j, "depth", {"kind", "base", "amplitude", "center", "width"});
    GaussianBump g;
    g.base = number_or(j, "base", "depth", 1.0);
    g.amplitude = number_or(j, "amplitude", "depth", 1.0);
    if (!j.contains("center")) throw ConfigError("depth.center", "missing");
    g.center = point(j.at("center"), "depth.center");
    g.width = number_or(j, "width", "depth", 1.0);
    if (!(g.width > 0.0)) throw ConfigError("depth.width", "must be positive");
    return g;
  }
  if (kind == "linear") {
    allow_keys(j, "depth", {"kind", "base", "slope1", "slope2"});
    return LinearRamp{number(j, "base", "depth"), number_or(j, "slope1", "depth", 0.0),
                      number_or(j, "slope2", "depth", 0.0)};
  }
  throw ConfigError("depth.kind", "expected constant, gaussian or linear");
}

Table2D background(const json& j, const Rect& r, int n1, int n2) {
  if (!j.is_object()) throw ConfigError("psi0", "must be an object");
  allow_keys(j, "psi0", {"kind", "base", "slope1", "slope2"});
  if (j.value("kind", "") != "linear") throw ConfigError("psi0.kind", "expected linear");
  const double base = number(j, "base", "psi0");
  const double s1 = number_or(j, "slope1", "psi0", 0.0);
  const double s2 = number_or(j, "slope2", "psi0", 0.0);
  std::vector<double> v;
  v.reserve(static_cast<std::size_t>(n1 + 1) * (n2 + 1));
  for (int i = 0; i <= n1; ++i)
    for (int j2 = 0; j2 <= n2; ++j2) {
      const double x1 = r.x1_min + r.width() * i / n1;
      const double x2 = r.x2_min + r.height() * j2 / n2;
      v.push_back(base + s1 * x1 + s2 * x2);
    }
  Table2D t(r, n1, n2, std::move(v));
  if (!(t.max_value() < 0.0)) throw ConfigError("psi0", "must be strictly negative on the rectangle");
  return t;
}

SolverOptions solver(const json& j) {
  if (!j.is_object()) throw ConfigError("solver", "must be an object");
  allow_keys(j, "solver",
             {"tol", "max_iterations", "shrink", "max_step", "armijo", "max_backtracks",
              "reproject_every", "memory", "warm_start", "lift", "newton_switch", "minres_tol",
              "minres_max_iterations"});
  SolverOptions o;
  o.tol = number_or(j, "tol", "solver", o.tol);
  o.max_iterations = integer_or(j, "max_iterations", "solver", o.max_iterations);
  o.shrink = number_or(j, "shrink", "solver", o.shrink);
  o.max_step = number_or(j, "max_step", "solver", o.max_step);
  o.armijo = number_or(j, "armijo", "solver", o.armijo);
  o.max_backtracks = integer_or(j, "max_backtracks", "solver", o.max_backtracks);
  o.reproject_every = integer_or(j, "reproject_every", "solver", o.reproject_every);
  o.memory = integer_or(j, "memory", "solver", o.memory);
  o.warm_start = flag_or(j, "warm_start", "solver", o.warm_start);
  o.newton_switch = number_or(j, "newton_switch", "solver", o.newton_switch);
  o.minres_tol = number_or(j, "minres_tol", "solver", o.minres_tol);
  o.minres_max_iterations = integer_or(j, "minres_max_iterations", "solver", o.minres_max_iterations);
  if (j.contains("lift")) {
    const json& l = j.at("lift");
    if (l == "cholesky")
      o.lift = LinearBackend::Cholesky;
    else if (l == "cg")
      o.lift = LinearBackend::ConjugateGradient;
    else
      throw ConfigError("solver.lift", "expected cholesky or cg");
  }
  try {
    validate(o);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("solver", e.what());
  }
  return o;
}

CheckToggles checks(const json& j) {
  if (!j.is_object()) throw ConfigError("checks", "must be an object");
  allow_keys(j, "checks", {"gradient", "lower_bound", "nehari", "hardy", "identities", "samples"});
  CheckToggles c;
  c.gradient = flag_or(j, "gradient", "checks", c.gradient);
  c.lower_bound = flag_or(j, "lower_bound", "checks", c.lower_bound);
  c.nehari = flag_or(j, "nehari", "checks", c.nehari);
  c.hardy = flag_or(j, "hardy", "checks", c.hardy);
  c.identities = flag_or(j, "identities", "checks", c.identities);
  c.samples = integer_or(j, "samples", "checks", c.samples);
  if (c.samples < 1) throw ConfigError("checks.samples", "must be at least 1");
  return c;
}

DomainGeometry ring_box(const json& doc, double r_star) {
  if (!doc.contains("rect")) return default_ring_box(r_star);
  DomainGeometry g;
  g.rect = rect(doc.at("rect"), "rect");
  if (g.rect.x1_min != 0.0) throw ConfigError("rect", "ring rectangles start on the axis x1 = 0");
  g.axis = true;
  g.truncated = true;
  return g;
}

} // namespace

RunConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("config", std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config", "must be a JSON object");
  allow_keys(doc, "",
             {"scenario", "W", "kappa", "p", "depth", "psi0", "rect", "z_half", "epsilons",
              "resolution", "solver", "center", "output", "seed", "checks", "test_hooks",
              "write_operator"});

  RunConfig c;
  if (!doc.contains("scenario") || !doc.at("scenario").is_string())
    throw ConfigError("scenario", "missing or not a string");
  c.scenario = doc.at("scenario").get<std::string>();

  if (!doc.contains("epsilons") || !doc.at("epsilons").is_array() || doc.at("epsilons").empty())
    throw ConfigError("epsilons", "must be a nonempty array");
  for (const auto& v : doc.at("epsilons")) {
    if (!v.is_number()) throw ConfigError("epsilons", "entries must be numbers");
    const double e = v.get<double>();
    if (!(e > 0.0 && e < 1.0)) throw ConfigError("epsilons", "entries must lie in (0, 1)");
    if (!c.epsilons.empty() && !(e < c.epsilons.back()))
      throw ConfigError("epsilons", "must be strictly decreasing");
    c.epsilons.push_back(e);
  }

  if (doc.contains("resolution")) {
    const json& r = doc.at("resolution");
    if (r.is_number_integer()) {
      c.n1 = c.n2 = r.get<int>();
    } else if (r.is_array() && r.size() == 2 && r[0].is_number_integer() && r[1].is_number_integer()) {
      c.n1 = r[0].get<int>();
      c.n2 = r[1].get<int>();
    } else {
      throw ConfigError("resolution", "must be an integer or [n1, n2]");
    }
  }
  if (c.n1 < 8 || c.n2 < 8) throw ConfigError("resolution", "must be at least 8 per axis");

  const double p = number_or(doc, "p", "", 2.0);
  if (!(p > 1.0)) throw ConfigError("p", "must exceed 1");

  if (c.scenario == "lake") {
    if (doc.contains("W") || doc.contains("z_half"))
      throw ConfigError(doc.contains("W") ? "W" : "z_half", "not used by the lake scenario");
    if (!doc.contains("depth")) throw ConfigError("depth", "missing");
    const WeightProfile b = depth(doc.at("depth"));
    const Rect r = doc.contains("rect") ? rect(doc.at("rect"), "rect") : Rect{};
    try {
      if (doc.contains("psi0")) {
        if (doc.contains("kappa")) throw ConfigError("kappa", "give either kappa or psi0, not both");
        c.spec = make_lake(b, background(doc.at("psi0"), r, c.n1, c.n2), r);
      } else {
        c.spec = make_lake(b, number(doc, "kappa", ""), r);
      }
    } catch (const std::invalid_argument& e) {
      throw ConfigError("depth", e.what());
    }
  } else if (c.scenario == "ring_whole_space" || c.scenario == "ring_cylinder" ||
             c.scenario == "ring_outside_ball") {
    if (doc.contains("depth") || doc.contains("psi0"))
      throw ConfigError(doc.contains("depth") ? "depth" : "psi0", "only used by the lake scenario");
    const double W = number(doc, "W", "");
    const double kappa = number(doc, "kappa", "");
    if (!(W > 0.0)) throw ConfigError("W", "must be positive");
    if (!(kappa > 0.0)) throw ConfigError("kappa", "must be positive");
    try {
      if (c.scenario == "ring_whole_space") {
        c.spec = make_whole_space_ring(W, kappa, ring_box(doc, kappa / (4.0 * std::numbers::pi * W)));
      } else if (c.scenario == "ring_cylinder") {
        if (doc.contains("rect")) throw ConfigError("rect", "the cylinder box is set by z_half");
        c.spec = make_cylinder_ring(W, kappa, number_or(doc, "z_half", "", 3.0));
      } else {
        const double cc = kappa / (2.0 * std::numbers::pi * W);
        const double r = cc <= 3.0 ? 1.0 : outside_ball_r_star(cc);
        c.spec = make_outside_ball_ring(W, kappa, ring_box(doc, r));
      }
    } catch (const std::invalid_argument& e) {
      throw ConfigError("scenario", e.what());
    }
    if (c.scenario != "ring_cylinder" && doc.contains("z_half"))
      throw ConfigError("z_half", "only used by the cylinder scenario");
  } else {
    throw ConfigError("scenario",
                      "expected lake, ring_whole_space, ring_cylinder or ring_outside_ball");
  }
  c.spec.p = p;
  c.spec.epsilon = c.epsilons.front();
  try {
    c.spec.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("scenario", e.what());
  }

  if (doc.contains("solver")) c.solver = solver(doc.at("solver"));
  if (doc.contains("center")) c.center = point(doc.at("center"), "center");
  if (doc.contains("output")) {
    if (!doc.at("output").is_string()) throw ConfigError("output", "must be a string");
    c.output = doc.at("output").get<std::string>();
  }
  if (doc.contains("seed")) {
    const json& s = doc.at("seed");
    if (!s.is_number_unsigned()) throw ConfigError("seed", "must be a nonnegative integer");
    c.seed = s.get<std::uint64_t>();
  }
  if (doc.contains("checks")) c.checks = checks(doc.at("checks"));
  if (doc.contains("test_hooks")) {
    const json& h = doc.at("test_hooks");
    if (!h.is_object()) throw ConfigError("test_hooks", "must be an object");
    allow_keys(h, "test_hooks", {"corrupt_gradient"});
    c.hooks.corrupt_gradient = flag_or(h, "corrupt_gradient", "test_hooks", false);
  }
  c.write_operator = flag_or(doc, "write_operator", "", false);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config", "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

} // namespace svx::cli
