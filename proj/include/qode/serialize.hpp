#pragma once

#include <string>

#include <json.hpp>

#include "qode/basis.hpp"
#include "qode/diagnostics.hpp"
#include "qode/trajectory.hpp"

namespace qode {

/// Columnar trajectory CSV (t, x1..xn, u1..um, c) plus a JSON sidecar at
/// path + ".json" holding the grid, terminal cost and provenance fields.
void write_trajectory_csv(const Trajectory& traj, const std::string& path,
                          const nlohmann::json& provenance = {});
Trajectory read_trajectory_csv(const std::string& path);

/// Theta checkpoint: a single JSON document with coefficients and metadata
/// (basis hash, sigma, tol, solver stats). Deterministic byte output.
void write_theta(const ThetaVector& theta, const std::string& path);
ThetaVector read_theta(const std::string& path);

nlohmann::json verdict_json(const ConditionVerdict& v);
nlohmann::json boundedness_json(const BoundednessReport& report);

/// FNV-1a hash of a canonically-dumped JSON document, hex encoded.
std::string config_hash(const nlohmann::json& config);

/// Results CSV: '#'-prefixed header lines carry the config hash and version,
/// then a column-name row and the data rows.
void write_results_csv(const std::string& path,
                       const std::vector<std::string>& columns,
                       const std::vector<std::vector<double>>& rows,
                       const nlohmann::json& config);

std::vector<std::vector<double>> read_results_csv(const std::string& path);

/// Minimal deterministic SVG line chart: one polyline per series over a
/// shared x column. Byte output depends only on the inputs.
std::string svg_line_plot(const std::vector<double>& x,
                          const std::vector<std::pair<std::string,
                                                      std::vector<double>>>& series,
                          const std::string& title);

void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

}  // namespace qode
