#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <algorithm>
#include <vector>

#include "mfg/cost.hpp"
#include "mfg/fields.hpp"
#include "mfg/mesh.hpp"

namespace mfg {

/// Precomputed factorization of the space-time operator
///   A = Dt Dt* - div grad
/// acting on dual fields (h*n unknowns, staggered steps). The system is
/// symmetrized by the vertex-area weights and factored once per (mesh, n);
/// solves are reused across all iterations.
class ProjectionOperator {
public:
  ProjectionOperator(const TriMesh& mesh, int steps);

  int steps() const { return n_; }
  int vertex_count() const { return h_; }

  /// Solves A psi = rhs for a staggered right-hand side (h x n). One step of
  /// iterative refinement keeps the residual near machine precision.
  DualField solve(const Eigen::Ref<const Eigen::MatrixXd>& rhs) const;

  /// Forward application of A (round-trip checks).
  DualField apply(const Eigen::Ref<const Eigen::MatrixXd>& psi) const;

private:
  int h_ = 0;
  int n_ = 0;
  Eigen::VectorXd vertex_area_;
  Eigen::SparseMatrix<double> system_; // weighted, symmetric positive definite
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> factor_;
  const TriMesh* mesh_ = nullptr;
};

/// Exact projection onto the continuity constraint set
///   { (P, M) : Dt P + div M = 0, P(t_0) = initial }
/// in the area-weighted product norm. Returns the unique closest point.
std::pair<DensityField, FluxField> project(const ProjectionOperator& op,
                                           const TriMesh& mesh,
                                           const Eigen::Ref<const Eigen::MatrixXd>& density_target,
                                           const std::vector<Eigen::MatrixX3d>& flux_target,
                                           const Eigen::VectorXd& initial);

/// Plain explicit step (P, M) - eta * grad objective; no feasibility claim.
std::pair<Eigen::MatrixXd, std::vector<Eigen::MatrixX3d>>
gradient_step(const TriMesh& mesh, const CostSpec& spec, const DensityField& density,
              const FluxField& flux, double eta);

/// Norms of the three optimality defects: stationarity in the density
/// (complementarity min against P), stationarity in the flux, and the
/// continuity residual. All under the 1/n-weighted area inner products.
struct KktResidual {
  double density = 0.0;    // |E_P|
  double flux = 0.0;       // |E_M|
  double continuity = 0.0; // |E_c|

  double max() const { return std::max({density, flux, continuity}); }
  double min() const { return std::min({density, flux, continuity}); }
};

KktResidual kkt_residual(const TriMesh& mesh, const CostSpec& spec,
                         const ProjectionOperator& op, const DensityField& density,
                         const FluxField& flux);

struct SolveOptions {
  int iterations = 1000;
  double step_size = 1.0;
  bool line_search = false;
  int log_every = 0;       // 0 = silent
  double tolerance = 0.0;  // stop early when the max KKT norm drops below; 0 = off
  int kkt_every = 25;      // KKT check interval when tolerance > 0
  bool deterministic = true;
};

struct SolveReport {
  std::vector<double> objective_trace; // entry 0 = after the initial projection
  CostBreakdown final_costs;
  KktResidual kkt_initial;         // iterate 0
  KktResidual kkt_first_iteration; // after iteration 1 (equals kkt_initial when stopped at 0)
  KktResidual kkt_final;
  double min_density = 0.0;              // smallest density entry seen
  double max_continuity_residual = 0.0;  // largest |E_c| across iterates
  double max_mass_error = 0.0;           // largest |mass - initial mass| across slices
  double precompute_seconds = 0.0;
  double solve_seconds = 0.0;
  int iterations_run = 0;
};

struct SolveResult {
  DensityField density;
  FluxField flux;
  SolveReport report;
};

/// Proximal gradient descent: explicit gradient step on the smooth objective
/// followed by exact projection onto the continuity constraints. Starts from
/// P = initial everywhere, M = 0, projected. Deterministic given identical
/// inputs. `shared_op`, when non-null, must match (mesh, steps) and skips the
/// factorization.
SolveResult pgd_solve(const TriMesh& mesh, const CostSpec& spec,
                      const Eigen::VectorXd& initial_density, int steps,
                      const SolveOptions& options,
                      const ProjectionOperator* shared_op = nullptr);

/// 1/n-weighted area norms of staggered or central scalar fields and flux
/// stacks, used for residuals and distances.
double field_norm(const TriMesh& mesh, const Eigen::Ref<const Eigen::MatrixXd>& slices);
double flux_norm(const TriMesh& mesh, const std::vector<Eigen::MatrixX3d>& slices);

/// Continuity defect Dt P + div M as a staggered field.
Eigen::MatrixXd continuity_residual(const TriMesh& mesh, const DensityField& density,
                                    const FluxField& flux);

} // namespace mfg
