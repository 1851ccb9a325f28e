#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "svx/diagnostics.hpp"

namespace svx {

/// 17 significant digits ("%.17g"); non-finite values become "null" in JSON.
std::string format_double(double x);

/// Deterministic JSON document: scenario, limits, per-eps rows, trend fits.
std::string report_to_json(const AsymptoticsReport& report);
/// Throws svx::Error when the document is malformed or incomplete.
AsymptoticsReport report_from_json(const std::string& text);

/// One row per eps with a header line.
std::string report_to_csv(const AsymptoticsReport& report);

/// The comparison of measured quantities against the predicted limits.
std::string comparison_table(const AsymptoticsReport& report);

/// One JSON object per line: iteration, energy, gradient_norm, step, kind.
std::string trace_to_jsonl(const std::vector<TraceEntry>& trace);

/// CSV with header x1,x2,u,psi,vorticity over every lattice node.
std::string solution_to_csv(const DiscreteProblem& problem, const Field& u);

/// Writes to a sibling temporary and renames it into place; throws svx::Error.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

} // namespace svx
