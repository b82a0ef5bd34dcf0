#pragma once

#include <Eigen/Core>

#include <memory>
#include <vector>

#include "mfg/fields.hpp"
#include "mfg/kernel.hpp"
#include "mfg/mesh.hpp"

namespace mfg {

enum class InteractionKind { vanilla, obstacle, entropy, congestion, nonlocal, dirichlet };
enum class TerminalKind { quadratic, kl, obstacle_region };

/// Declarative description of the objective: the dynamic cost is always the
/// kinetic term |M|^2 / (2 rho_bar); interaction and terminal parts are
/// selected here. Vectors are sized h when their kind needs them.
struct CostSpec {
  AveragingMode averaging = AveragingMode::arithmetic;

  InteractionKind interaction = InteractionKind::vanilla;
  double interaction_weight = 0.0;
  Eigen::VectorXd obstacle;                // indicator B, obstacle kind
  double congestion_floor = 1e-4;          // constant inside the square root
  std::shared_ptr<const Kernel> kernel;    // nonlocal and dirichlet kinds

  TerminalKind terminal = TerminalKind::quadratic;
  double terminal_weight = 0.0;
  Eigen::VectorXd target;                  // desired terminal density
  Eigen::VectorXd terminal_region;         // indicator B_T, obstacle_region kind

  /// Densities entering logs, square roots and divisions are clamped below
  /// at this value; gradients use the clamped argument.
  double density_floor = 1e-8;

  /// Shape and range checks; throws ErrorKind::validation.
  void validate(const TriMesh& mesh) const;
};

struct CostBreakdown {
  double total = 0.0;
  double dynamic = 0.0;
  double interaction = 0.0;
  double terminal = 0.0;
};

struct CostGradient {
  Eigen::MatrixXd density;              // h x n, central steps
  std::vector<Eigen::MatrixX3d> flux;   // n slices, s x 3, staggered steps
};

/// Full objective: the dynamic term runs over all n staggered steps, the
/// interaction term over interior central steps 1..n-1 (weighted 1/n), the
/// terminal term over the last slice.
CostBreakdown objective(const TriMesh& mesh, const CostSpec& spec,
                        const DensityField& density, const FluxField& flux);

/// Interaction functional of one density slice (no 1/n weight).
double interaction_value(const TriMesh& mesh, const CostSpec& spec,
                         const Eigen::Ref<const Eigen::VectorXd>& slice);

/// Terminal functional of the last density slice.
double terminal_value(const TriMesh& mesh, const CostSpec& spec,
                      const Eigen::Ref<const Eigen::VectorXd>& last);

/// Partial derivatives of `objective` with respect to every density and flux
/// entry (plain coordinates, area and 1/n factors included).
CostGradient objective_gradient(const TriMesh& mesh, const CostSpec& spec,
                                const DensityField& density, const FluxField& flux);

} // namespace mfg
