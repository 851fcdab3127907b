#pragma once

// File formats: frames as JSON with [re, im] complex pairs, real fields as
// little-endian float64 row-major binaries with a JSON sidecar, vector
// distributions as a metadata document plus one binary per component, and
// tidy CSV tables.

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "spintomo/dynamics.hpp"

namespace spintomo::io {

using nlohmann::json;
namespace fs = std::filesystem;

json complex_to_json(Complex z);
Complex complex_from_json(const json& j);
json spin_matrix_to_json(const SpinMatrix& m);
SpinMatrix spin_matrix_from_json(const json& j, int dim);

/// Keys: spin, directions, eigenvalues, dequantizer, quantizer.
json frame_to_json(const SpinFrame& frame);
/// Rebuilds the frame from spin/directions/eigenvalues and, when the stored
/// matrices are present, checks them against the rebuilt ones to 1e-10
/// (InvalidArgument on mismatch).
SpinFrame frame_from_json(const json& j);

json grid_to_json(const PhaseSpaceGrid& grid);
PhaseSpaceGrid grid_from_json(const json& j);
json domain_to_json(const TomogramDomain& domain);
TomogramDomain domain_from_json(const json& j);

void write_json(const fs::path& path, const json& j);
json read_json(const fs::path& path);

/// Writes <stem>.bin and <stem>.json; the sidecar records rows, cols, dtype
/// and byte order next to the caller's metadata.
void write_field(const fs::path& stem, const Eigen::MatrixXd& values, json meta = json::object());
Eigen::MatrixXd read_field(const fs::path& stem, json* meta = nullptr);

/// CSV with a header row; numbers are written with 17 significant digits.
class CsvWriter {
 public:
  CsvWriter(const fs::path& path, const std::vector<std::string>& header);
  void row(const std::vector<double>& values);
  /// Leading text cells followed by numbers.
  void row(const std::vector<std::string>& labels, const std::vector<double>& values);

 private:
  std::ofstream out_;
  std::size_t columns_;
};

std::string format_number(double x);

/// Metadata <dir>/<stem>.json plus <dir>/<stem>_w<j>.bin/.json per component.
void write_vector_distribution(const fs::path& dir, const std::string& stem,
                               const VectorDistribution& v);
VectorDistribution read_vector_distribution(const fs::path& meta_path);

/// One row per domain point: (q, p) or (X, theta) or (X, mu, nu), then w1..wN.
void write_vector_csv(const fs::path& path, const VectorDistribution& v);

/// Per-frame vector files plus manifest.json (times, scheme, field) and
/// conserved.csv (t, trace, energy, norm_sum, residual_max).
void write_trajectory(const fs::path& dir, const VectorTrajectory& traj, const json& field,
                      const std::string& scheme);

enum class PlotData { ComponentIntegrals, Slice, Conserved };

/// Tidy CSV with one row per (t, series) pair:
///   component-integrals: t, series, value        (series w1..wN)
///   conserved:           t, series, value        (trace, energy, norm_sum, residual_max)
///   slice:               t, series, X, value     (optical slice nearest theta, or the
///                                                  position marginal of a Wigner/Husimi vector)
/// Throws InvalidArgument for an empty trajectory.
void emit_plot_data(const VectorTrajectory& traj, PlotData what, const fs::path& path,
                    double theta = 0.0);

}  // namespace spintomo::io
