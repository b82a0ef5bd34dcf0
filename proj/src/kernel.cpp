#include "mfg/kernel.hpp"

#include <cmath>
#include <utility>

#include "mfg/errors.hpp"

namespace mfg {

Kernel::Kernel(Eigen::MatrixXd weights) {
  if (weights.rows() != weights.cols())
    fail(ErrorKind::validation, "kernel matrix must be square");
  const Eigen::Index h = weights.rows();
  weights_ = std::move(weights);
  for (Eigen::Index i = 0; i < h; ++i)
    for (Eigen::Index j = i + 1; j < h; ++j) {
      const double w = 0.5 * (weights_(i, j) + weights_(j, i));
      weights_(i, j) = w;
      weights_(j, i) = w;
    }
}

Kernel Kernel::geodesic_gaussian(const TriMesh& mesh, double mu, double sigma,
                                 GeodesicMode mode) {
  if (!(sigma > 0.0))
    fail(ErrorKind::validation, "gaussian kernel: sigma must be positive");
  if (!(mu > 0.0))
    fail(ErrorKind::validation, "gaussian kernel: mu must be positive");

  const int h = mesh.vertex_count();
  Eigen::MatrixXd K(h, h);
  const double inv_sigma_sq = 1.0 / (sigma * sigma);
  for (int i = 0; i < h; ++i) {
    const Eigen::VectorXd dist = mode == GeodesicMode::sphere
                                     ? sphere_distances(mesh, i)
                                     : geodesic_distances(mesh, i);
    K(i, i) = mu;
    // Fill both halves from one source so the matrix is exactly symmetric.
    for (int j = i + 1; j < h; ++j) {
      const double w = mu * std::exp(-dist[j] * dist[j] * inv_sigma_sq);
      K(i, j) = w;
      K(j, i) = w;
    }
  }
  return Kernel(std::move(K));
}

Kernel Kernel::mesh_laplacian(const TriMesh& mesh) {
  const int h = mesh.vertex_count();
  const Eigen::VectorXd& area = mesh.vertex_areas();
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(h, h);
  const Eigen::SparseMatrix<double>& stiffness = mesh.stiffness();
  for (int col = 0; col < stiffness.outerSize(); ++col)
    for (Eigen::SparseMatrix<double>::InnerIterator it(stiffness, col); it; ++it)
      K(it.row(), it.col()) = it.value() / (area[it.row()] * area[it.col()]);
  return Kernel(std::move(K));
}

} // namespace mfg
