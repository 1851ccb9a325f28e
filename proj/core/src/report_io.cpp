#include "svx/report_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>
#include <unistd.h>

#include <json.hpp>

#include "svx/error.hpp"

namespace svx {

namespace {

struct DoubleField {
  const char* name;
  double AsymptoticsRow::*member;
};

constexpr DoubleField row_doubles[] = {
    {"epsilon", &AsymptoticsRow::epsilon},
    {"energy", &AsymptoticsRow::energy},
    {"kappa", &AsymptoticsRow::kappa},
    {"kappa_normalized", &AsymptoticsRow::kappa_normalized},
    {"kappa_gap", &AsymptoticsRow::kappa_gap},
    {"energy_ratio", &AsymptoticsRow::energy_ratio},
    {"q2b_at_peak", &AsymptoticsRow::q2b_at_peak},
    {"upper_bound_ratio", &AsymptoticsRow::upper_bound_ratio},
    {"b_at_peak", &AsymptoticsRow::b_at_peak},
    {"b_gap", &AsymptoticsRow::b_gap},
    {"diameter", &AsymptoticsRow::diameter},
    {"diam_over_eps", &AsymptoticsRow::diam_over_eps},
    {"area", &AsymptoticsRow::area},
    {"distance_to_boundary", &AsymptoticsRow::distance_to_boundary},
    {"gradient_norm", &AsymptoticsRow::gradient_norm},
    {"nehari_residual", &AsymptoticsRow::nehari_residual},
};

struct IntField {
  const char* name;
  int AsymptoticsRow::*member;
};

constexpr IntField row_ints[] = {
    {"components", &AsymptoticsRow::components},
    {"core_nodes", &AsymptoticsRow::core_nodes},
    {"iterations", &AsymptoticsRow::iterations},
};

std::string json_number(double x) { return std::isfinite(x) ? format_double(x) : "null"; }

std::string json_string(const std::string& s) { return nlohmann::json(s).dump(); }

double read_double(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) throw Error(std::string("report is missing '") + key + "'");
  const auto& v = j.at(key);
  if (v.is_null()) return std::nan("");
  if (!v.is_number()) throw Error(std::string("report field '") + key + "' is not a number");
  return v.get<double>();
}

} // namespace

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string report_to_json(const AsymptoticsReport& r) {
  std::ostringstream os;
  os << "{\n";
  os << "  \"format\": \"svx-report-1\",\n";
  os << "  \"scenario\": " << json_string(r.scenario) << ",\n";
  os << "  \"limits\": {\n";
  os << "    \"circulation\": " << json_number(r.limit_circulation) << ",\n";
  os << "    \"energy_density\": " << json_number(r.limit_energy_density) << ",\n";
  os << "    \"sup_b\": " << json_number(r.sup_b) << ",\n";
  os << "    \"target\": [" << json_number(r.target.x1) << ", " << json_number(r.target.x2) << "],\n";
  os << "    \"diameter_slope\": 1\n";
  os << "  },\n";
  os << "  \"rows\": [";
  for (std::size_t k = 0; k < r.rows.size(); ++k) {
    const AsymptoticsRow& row = r.rows[k];
    os << (k ? ",\n" : "\n") << "    {";
    bool first = true;
    for (const auto& f : row_doubles) {
      os << (first ? "" : ", ") << '"' << f.name << "\": " << json_number(row.*f.member);
      first = false;
    }
    os << ", \"peak\": [" << json_number(row.peak.x1) << ", " << json_number(row.peak.x2) << "]";
    os << ", \"centroid\": [" << json_number(row.centroid.x1) << ", " << json_number(row.centroid.x2)
       << "]";
    for (const auto& f : row_ints) os << ", \"" << f.name << "\": " << row.*f.member;
    os << ", \"converged\": " << (row.converged ? "true" : "false") << "}";
  }
  os << (r.rows.empty() ? "],\n" : "\n  ],\n");
  os << "  \"trends\": {\n";
  os << "    \"energy_ratio_decreasing\": " << (r.energy_ratio_decreasing ? "true" : "false") << ",\n";
  os << "    \"kappa_gap_decreasing\": " << (r.kappa_gap_decreasing ? "true" : "false") << ",\n";
  os << "    \"b_gap_decreasing\": " << (r.b_gap_decreasing ? "true" : "false") << ",\n";
  if (r.scaling) {
    os << "    \"diameter_slope\": " << json_number(r.scaling->slope) << ",\n";
    os << "    \"diam_over_eps_min\": " << json_number(r.scaling->min_ratio) << ",\n";
    os << "    \"diam_over_eps_max\": " << json_number(r.scaling->max_ratio) << "\n";
  } else {
    os << "    \"diameter_slope\": \"insufficient points\"\n";
  }
  os << "  }\n";
  os << "}\n";
  return os.str();
}

AsymptoticsReport report_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("report is not valid JSON: ") + e.what());
  }
  try {
    if (!j.is_object() || j.value("format", "") != "svx-report-1")
      throw Error("report has an unknown format tag");
    AsymptoticsReport r;
    r.scenario = j.at("scenario").get<std::string>();
    const auto& lim = j.at("limits");
    r.limit_circulation = read_double(lim, "circulation");
    r.limit_energy_density = read_double(lim, "energy_density");
    r.sup_b = read_double(lim, "sup_b");
    r.target = {lim.at("target").at(0).get<double>(), lim.at("target").at(1).get<double>()};
    for (const auto& jr : j.at("rows")) {
      AsymptoticsRow row;
      for (const auto& f : row_doubles) row.*f.member = read_double(jr, f.name);
      for (const auto& f : row_ints) row.*f.member = jr.at(f.name).get<int>();
      row.peak = {jr.at("peak").at(0).get<double>(), jr.at("peak").at(1).get<double>()};
      row.centroid = {jr.at("centroid").at(0).get<double>(), jr.at("centroid").at(1).get<double>()};
      row.converged = jr.at("converged").get<bool>();
      r.rows.push_back(row);
    }
    refresh_trends(r);
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("report is incomplete: ") + e.what());
  }
}

std::string report_to_csv(const AsymptoticsReport& r) {
  std::ostringstream os;
  bool first = true;
  for (const auto& f : row_doubles) {
    os << (first ? "" : ",") << f.name;
    first = false;
  }
  os << ",peak_x1,peak_x2,centroid_x1,centroid_x2";
  for (const auto& f : row_ints) os << ',' << f.name;
  os << ",converged\n";
  for (const auto& row : r.rows) {
    first = true;
    for (const auto& f : row_doubles) {
      os << (first ? "" : ",") << format_double(row.*f.member);
      first = false;
    }
    os << ',' << format_double(row.peak.x1) << ',' << format_double(row.peak.x2) << ','
       << format_double(row.centroid.x1) << ',' << format_double(row.centroid.x2);
    for (const auto& f : row_ints) os << ',' << row.*f.member;
    os << ',' << (row.converged ? 1 : 0) << '\n';
  }
  return os.str();
}

std::string comparison_table(const AsymptoticsReport& r) {
  std::ostringstream os;
  char line[256];
  os << "scenario: " << r.scenario << '\n';
  std::snprintf(line, sizeof line, "targets: kappa b(a)/q(a) -> %.10g, E/(pi log(1/eps)) -> %.10g, "
                "diameter slope -> 1\n", r.limit_circulation, r.limit_energy_density);
  os << line;
  std::snprintf(line, sizeof line, "%-8s %-16s %-10s %-16s %-10s %-10s %-10s %-22s %s\n", "eps",
                "kappa b/q", "gap", "E/(pi L inf)", "b gap", "diam/eps", "comps", "centroid", "conv");
  os << line;
  for (const auto& row : r.rows) {
    std::snprintf(line, sizeof line,
                  "%-8.4g %-16.10g %-10.4g %-16.10g %-10.4g %-10.4g %-10d (%.6g, %.6g)%*s %s\n",
                  row.epsilon, row.kappa_normalized, row.kappa_gap, row.upper_bound_ratio, row.b_gap,
                  row.diam_over_eps, row.components, row.centroid.x1, row.centroid.x2, 4, "",
                  row.converged ? "yes" : "no");
    os << line;
  }
  os << "energy ratio decreasing: " << (r.energy_ratio_decreasing ? "yes" : "no") << '\n';
  os << "kappa gap decreasing:    " << (r.kappa_gap_decreasing ? "yes" : "no") << '\n';
  os << "b gap decreasing:        " << (r.b_gap_decreasing ? "yes" : "no") << '\n';
  if (r.scaling) {
    std::snprintf(line, sizeof line, "diameter slope: %.10g (target 1), diam/eps in [%.6g, %.6g]\n",
                  r.scaling->slope, r.scaling->min_ratio, r.scaling->max_ratio);
    os << line;
  } else {
    os << "diameter slope: insufficient points\n";
  }
  return os.str();
}

std::string trace_to_jsonl(const std::vector<TraceEntry>& trace) {
  std::ostringstream os;
  for (const auto& e : trace)
    os << "{\"iteration\": " << e.iteration << ", \"energy\": " << json_number(e.energy)
       << ", \"gradient_norm\": " << json_number(e.gradient_norm) << ", \"step\": "
       << json_number(e.step) << ", \"kind\": \"" << (e.newton ? "newton" : "descent") << "\"}\n";
  return os.str();
}

std::string solution_to_csv(const DiscreteProblem& problem, const Field& u) {
  const Grid& g = problem.grid();
  const NodalField full = expand(u);
  const double L = problem.log_factor();
  const double eps2 = problem.epsilon() * problem.epsilon();
  std::string out = "x1,x2,u,psi,vorticity\n";
  out.reserve(out.size() + g.node_count() * 96);
  char line[160];
  for (std::size_t k = 0; k < g.node_count(); ++k) {
    const Point x = g.node(k);
    const double psi = full[k] - L * problem.q_nodal()[k];
    const double w = g.is_interior(k) ? problem.b_nodal()[k] * positive_power(psi, problem.p()) / eps2
                                      : 0.0;
    std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g,%.17g\n", x.x1, x.x2, full[k], psi, w);
    out += line;
  }
  return out;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp-" + std::to_string(::getpid());
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw Error("cannot open " + tmp.string() + " for writing");
    os.write(content.data(), static_cast<std::streamsize>(content.size()));
    os.flush();
    if (!os) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw Error("write failed for " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error("cannot move " + tmp.string() + " into place");
  }
}

} // namespace svx
