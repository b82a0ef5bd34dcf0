#pragma once

#include <Eigen/Core>

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mfg/cost.hpp"
#include "mfg/kernel.hpp"
#include "mfg/mesh.hpp"
#include "mfg/solver.hpp"

namespace mfg {

/// Vertex predicate: union of coordinate boxes, longitude bands and explicit
/// index lists.
struct MaskSpec {
  enum class Kind { box, longitude_band, vertices };
  Kind kind = Kind::box;
  Eigen::Vector3d lo = Eigen::Vector3d::Zero(); // box
  Eigen::Vector3d hi = Eigen::Vector3d::Zero();
  double lon_min_deg = 0.0; // longitude band, degrees in [-180, 180]
  double lon_max_deg = 0.0;
  std::vector<int> indices; // explicit vertex list
};

struct MeshSpec {
  enum class Kind { file, icosphere, grid };
  Kind kind = Kind::icosphere;
  std::string path;     // file
  int subdivisions = 2; // icosphere
  double radius = 1.0;
  int nx = 10, ny = 10; // grid
  double width = 1.0, height = 1.0;
  std::vector<MaskSpec> puncture;
};

/// One geodesic Gaussian bump; the center is a vertex index or a coordinate
/// that snaps to the nearest vertex.
struct BumpSpec {
  std::optional<int> center_vertex;
  std::optional<Eigen::Vector3d> center;
  double sigma = 0.3;
  double weight = 1.0;
};

struct DensitySpec {
  std::vector<BumpSpec> bumps;
  std::string file;            // per-vertex values, one per line; overrides bumps
  double uniform_floor = 1e-8; // fraction of the uniform density mixed in
};

struct KernelSpec {
  enum class Kind { gaussian, laplacian };
  Kind kind = Kind::gaussian;
  double mu = 1.0;
  double sigma = 0.1;
};

struct InteractionSpec {
  InteractionKind kind = InteractionKind::vanilla;
  double weight = 0.0;
  std::vector<MaskSpec> region; // obstacle
  double floor = 1e-4;          // congestion
  KernelSpec kernel;            // nonlocal (dirichlet derives its own)
};

struct TerminalSpec {
  TerminalKind kind = TerminalKind::quadratic;
  double weight = 0.0;
  std::vector<MaskSpec> region; // obstacle_region
};

struct VariantSpec {
  std::string name;
  std::optional<InteractionSpec> interaction;
  std::optional<TerminalSpec> terminal;
};

struct OutputSpec {
  std::string directory = "runs/out";
  std::string format = "csv"; // csv | vtk
  bool snapshots = true;
};

/// Parsed scenario file. `parse` performs structural checks (strict keys,
/// ranges); `Validated` resolution happens against the actual mesh.
struct Scenario {
  std::string name;
  MeshSpec mesh;
  GeodesicMode geodesic = GeodesicMode::graph;
  int time_steps = 8;
  DensitySpec initial_density;
  std::optional<DensitySpec> target_density;
  AveragingMode averaging = AveragingMode::arithmetic;
  InteractionSpec interaction;
  TerminalSpec terminal;
  std::vector<VariantSpec> variants; // empty: single variant from `interaction`/`terminal`
  std::optional<InteractionSpec> report_interaction;
  SolveOptions solver;
  OutputSpec output;

  static Scenario parse_file(const std::string& path);
  static Scenario parse_text(const std::string& text, const std::string& name);

  /// Canonical serialization with every default materialized; re-parsing the
  /// dump reproduces an identical scenario.
  std::string dump() const;
};

/// Scenario resolved against its mesh: densities synthesized, masks turned
/// into indicators, kernels built, one CostSpec per variant.
struct ValidatedScenario {
  TriMesh mesh;
  Eigen::VectorXd initial;
  struct Variant {
    std::string name;
    CostSpec cost;
  };
  std::vector<Variant> variants;
  CostSpec report_cost; // interaction functional used for the cost table
  int time_steps = 0;
  SolveOptions solver;
  OutputSpec output;
  std::string scenario_name;
  std::string normalized; // canonical dump of the source scenario
};

ValidatedScenario validate_scenario(const Scenario& scenario);

/// Indicator vector of a mask union (1 on selected vertices).
Eigen::VectorXd mask_indicator(const TriMesh& mesh, const std::vector<MaskSpec>& masks);

/// Sum of geodesic Gaussian bumps, normalized to unit mass, with a uniform
/// floor mixed in afterwards (and mass restored).
Eigen::VectorXd synth_density(const TriMesh& mesh, const std::vector<BumpSpec>& bumps,
                              GeodesicMode mode, double uniform_floor);

} // namespace mfg
