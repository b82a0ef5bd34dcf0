#include <vector>

#include "mfg/errors.hpp"
#include "mfg/solver.hpp"

namespace mfg {

ProjectionOperator::ProjectionOperator(const TriMesh& mesh, int steps)
    : h_(mesh.vertex_count()), n_(steps), vertex_area_(mesh.vertex_areas()), mesh_(&mesh) {
  if (steps < 1)
    fail(ErrorKind::validation, "projection operator needs at least one time step");

  // Time block Dt Dt^*: n^2 * tridiag(-1, [1 2 .. 2], -1).
  const double nsq = static_cast<double>(n_) * n_;
  const Eigen::SparseMatrix<double>& stiffness = mesh.stiffness();

  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(static_cast<size_t>(n_) * (stiffness.nonZeros() + 3 * h_));
  for (int k = 0; k < n_; ++k) {
    const double diag = k == 0 ? 1.0 : 2.0;
    for (int i = 0; i < h_; ++i) {
      entries.emplace_back(k * h_ + i, k * h_ + i, nsq * diag * vertex_area_[i]);
      if (k + 1 < n_) {
        entries.emplace_back(k * h_ + i, (k + 1) * h_ + i, -nsq * vertex_area_[i]);
        entries.emplace_back((k + 1) * h_ + i, k * h_ + i, -nsq * vertex_area_[i]);
      }
    }
    for (int col = 0; col < stiffness.outerSize(); ++col)
      for (Eigen::SparseMatrix<double>::InnerIterator it(stiffness, col); it; ++it)
        entries.emplace_back(k * h_ + it.row(), k * h_ + it.col(), it.value());
  }

  system_.resize(h_ * n_, h_ * n_);
  system_.setFromTriplets(entries.begin(), entries.end());
  factor_.compute(system_);
  if (factor_.info() != Eigen::Success)
    fail(ErrorKind::solver, "space-time factorization failed (degenerate operator)");
}

DualField ProjectionOperator::solve(const Eigen::Ref<const Eigen::MatrixXd>& rhs) const {
  if (rhs.rows() != h_ || rhs.cols() != n_)
    fail(ErrorKind::validation, "projection solve: right-hand side has wrong shape");

  Eigen::VectorXd b(h_ * n_);
  for (int k = 0; k < n_; ++k)
    b.segment(k * h_, h_) = vertex_area_.cwiseProduct(rhs.col(k));

  Eigen::VectorXd x = factor_.solve(b);
  // One refinement pass keeps the continuity defect near machine precision.
  const Eigen::VectorXd residual = b - system_ * x;
  x += factor_.solve(residual);

  DualField psi(h_, n_);
  for (int k = 0; k < n_; ++k)
    psi.col(k) = x.segment(k * h_, h_);
  return psi;
}

DualField ProjectionOperator::apply(const Eigen::Ref<const Eigen::MatrixXd>& psi) const {
  if (psi.rows() != h_ || psi.cols() != n_)
    fail(ErrorKind::validation, "projection apply: field has wrong shape");
  const double nsq = static_cast<double>(n_) * n_;
  DualField out(h_, n_);
  for (int k = 0; k < n_; ++k) {
    Eigen::VectorXd slice = (k == 0 ? 1.0 : 2.0) * nsq * psi.col(k);
    if (k > 0)
      slice -= nsq * psi.col(k - 1);
    if (k + 1 < n_)
      slice -= nsq * psi.col(k + 1);
    out.col(k) = slice + (mesh_->stiffness() * psi.col(k)).cwiseQuotient(vertex_area_);
  }
  return out;
}

std::pair<DensityField, FluxField> project(const ProjectionOperator& op, const TriMesh& mesh,
                                           const Eigen::Ref<const Eigen::MatrixXd>& density_target,
                                           const std::vector<Eigen::MatrixX3d>& flux_target,
                                           const Eigen::VectorXd& initial) {
  const int n = op.steps();
  if (density_target.cols() != n || static_cast<int>(flux_target.size()) != n)
    fail(ErrorKind::validation, "project: fields disagree with the operator's step count");

  Eigen::MatrixXd rhs = time_diff(density_target, initial);
  for (int k = 0; k < n; ++k)
    rhs.col(k) += mesh.divergence(flux_target[k]);

  const DualField psi = op.solve(rhs);

  DensityField density;
  density.initial = initial;
  density.values = density_target - time_diff_adjoint(psi);

  FluxField flux;
  flux.values.resize(n);
  for (int k = 0; k < n; ++k)
    flux.values[k] = flux_target[k] + mesh.gradient(psi.col(k));

  return {std::move(density), std::move(flux)};
}

} // namespace mfg
