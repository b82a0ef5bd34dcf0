#pragma once

#include <Eigen/Core>

#include "mfg/mesh.hpp"

namespace mfg {

/// Distance convention for kernels and density synthesis.
enum class GeodesicMode {
  graph,  ///< Dijkstra over the mesh 1-skeleton
  sphere, ///< arccos of unit-position dot products (analytic spheres only)
};

/// Dense symmetric matrix of pairwise vertex interaction weights.
class Kernel {
public:
  /// Wraps an arbitrary matrix; non-symmetric inputs are symmetrized as
  /// (K + K^T)/2.
  explicit Kernel(Eigen::MatrixXd weights);

  /// mu * exp(-d(i,j)^2 / sigma^2) with d the chosen geodesic distance.
  static Kernel geodesic_gaussian(const TriMesh& mesh, double mu, double sigma,
                                  GeodesicMode mode = GeodesicMode::graph);

  /// Kernel whose quadratic form under the vertex-area weighting reproduces
  /// the integrated squared gradient:
  ///   1/2 P^T A_V K A_V P == 1/2 sum_j A_Tj |grad P|_j^2.
  static Kernel mesh_laplacian(const TriMesh& mesh);

  const Eigen::MatrixXd& weights() const { return weights_; }
  Eigen::Index size() const { return weights_.rows(); }

private:
  Eigen::MatrixXd weights_;
};

} // namespace mfg
