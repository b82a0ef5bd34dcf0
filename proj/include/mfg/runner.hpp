#pragma once

#include <string>

#include "mfg/scenario.hpp"

namespace mfg {

/// Results of one scenario run, as written to the output directory.
struct RunSummary {
  struct Row {
    std::string variant;
    double dynamic = 0.0;
    double interaction = 0.0; // under the scenario's report functional
    double terminal = 0.0;
    SolveReport report;
  };
  std::vector<Row> rows;
  std::string output_directory;

  /// Plain-text cost table (one row per variant).
  std::string table() const;
};

/// Solves every variant and writes snapshots, per-variant reports, the cost
/// table, and the normalized scenario into the output directory.
RunSummary run_scenario(const ValidatedScenario& scenario);

/// Reads the artifacts of a previous run and renders its report as text.
std::string render_run_report(const std::string& run_directory);

/// Per-step snapshot writers. `density` has one column per central step; the
/// initial slice is written as step 0.
void export_snapshots_csv(const TriMesh& mesh, const Eigen::VectorXd& initial,
                          const Eigen::MatrixXd& density, const std::string& directory);
void export_snapshots_vtk(const TriMesh& mesh, const Eigen::VectorXd& initial,
                          const Eigen::MatrixXd& density, const std::string& directory);

/// Legacy ASCII VTK POLYDATA with one per-vertex scalar field.
void write_vtk(const TriMesh& mesh, const Eigen::VectorXd& scalar,
               const std::string& scalar_name, const std::string& path);

} // namespace mfg
