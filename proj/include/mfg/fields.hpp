#pragma once

#include <Eigen/Core>

#include <vector>

#include "mfg/mesh.hpp"

namespace mfg {

/// Vertex density at the n central time steps t_k = k/n, k = 1..n, plus the
/// fixed initial slice at t_0. Column k-1 of `values` holds the slice at t_k.
/// Storage is slice-major: one time step is contiguous.
struct DensityField {
  Eigen::VectorXd initial; // density at t_0, length h
  Eigen::MatrixXd values;  // h x n

  int steps() const { return static_cast<int>(values.cols()); }

  /// All central slices equal to the initial slice.
  static DensityField constant(const Eigen::VectorXd& initial, int steps);
};

/// Per-triangle momentum at the n staggered steps t_{k-1/2}; entry k-1 of
/// `values` is the s x 3 slice at t_{k-1/2}. Rows stay tangent to their
/// triangle under every operation that produces flux.
struct FluxField {
  std::vector<Eigen::MatrixX3d> values;

  int steps() const { return static_cast<int>(values.size()); }

  static FluxField zero(int triangles, int steps);
};

/// Dual (multiplier) variable on vertices at staggered steps, stored like a
/// staggered scalar field: column k-1 holds the slice at t_{k-1/2}.
using DualField = Eigen::MatrixXd;

/// Forward time difference onto staggered steps:
/// slice k = n * (central_k - central_{k-1}) with central_0 = initial.
/// Pass a zero `initial` to get the plain linear operator.
Eigen::MatrixXd time_diff(const Eigen::Ref<const Eigen::MatrixXd>& central,
                          const Eigen::Ref<const Eigen::VectorXd>& initial);

/// Adjoint of the linear part of time_diff under the 1/n-weighted time inner
/// products: slice k = n * (staggered_k - staggered_{k+1}), with the last
/// slice n * staggered_n.
Eigen::MatrixXd time_diff_adjoint(const Eigen::Ref<const Eigen::MatrixXd>& staggered);

enum class AveragingMode { arithmetic, geometric, harmonic };

/// Vertex densities averaged onto triangles. Geometric and harmonic modes
/// require strictly positive input (ErrorKind::domain otherwise).
Eigen::VectorXd average_density(const TriMesh& mesh,
                                const Eigen::Ref<const Eigen::VectorXd>& slice,
                                AveragingMode mode);

/// Partial derivatives of the triangle average with respect to the three
/// vertex values; row j column c is d(avg_j)/d(slice at corner c).
Eigen::MatrixX3d average_density_partials(const TriMesh& mesh,
                                          const Eigen::Ref<const Eigen::VectorXd>& slice,
                                          AveragingMode mode);

/// Triangle density at staggered steps: column k-1 holds
/// (W(P at t_k) + W(P at t_{k-1})) / 2, using the initial slice for k = 1.
Eigen::MatrixXd staggered_density(const TriMesh& mesh, const DensityField& density,
                                  AveragingMode mode);

/// Total mass sum_i A_V(i) * slice(i).
double slice_mass(const TriMesh& mesh, const Eigen::Ref<const Eigen::VectorXd>& slice);

} // namespace mfg
