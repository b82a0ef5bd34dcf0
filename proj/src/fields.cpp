#include "mfg/fields.hpp"

#include <cmath>

#include "mfg/errors.hpp"

namespace mfg {

DensityField DensityField::constant(const Eigen::VectorXd& initial, int steps) {
  DensityField field;
  field.initial = initial;
  field.values = initial.replicate(1, steps);
  return field;
}

FluxField FluxField::zero(int triangles, int steps) {
  FluxField field;
  field.values.assign(steps, Eigen::MatrixX3d::Zero(triangles, 3));
  return field;
}

Eigen::MatrixXd time_diff(const Eigen::Ref<const Eigen::MatrixXd>& central,
                          const Eigen::Ref<const Eigen::VectorXd>& initial) {
  const int n = static_cast<int>(central.cols());
  if (n < 1)
    fail(ErrorKind::validation, "time_diff: need at least one time step");
  if (initial.size() != central.rows())
    fail(ErrorKind::validation, "time_diff: initial slice has wrong length");
  Eigen::MatrixXd out(central.rows(), n);
  out.col(0) = n * (central.col(0) - initial);
  for (int k = 1; k < n; ++k)
    out.col(k) = n * (central.col(k) - central.col(k - 1));
  return out;
}

Eigen::MatrixXd time_diff_adjoint(const Eigen::Ref<const Eigen::MatrixXd>& staggered) {
  const int n = static_cast<int>(staggered.cols());
  if (n < 1)
    fail(ErrorKind::validation, "time_diff_adjoint: need at least one time step");
  Eigen::MatrixXd out(staggered.rows(), n);
  for (int k = 0; k + 1 < n; ++k)
    out.col(k) = n * (staggered.col(k) - staggered.col(k + 1));
  out.col(n - 1) = n * staggered.col(n - 1);
  return out;
}

namespace {

void require_positive(const TriMesh& mesh, const Eigen::Ref<const Eigen::VectorXd>& slice,
                      int j, const char* what) {
  const auto tri = mesh.triangles().row(j);
  for (int c = 0; c < 3; ++c)
    if (!(slice[tri[c]] > 0.0))
      fail(ErrorKind::domain, std::string(what) +
                                  " averaging requires strictly positive densities; vertex " +
                                  std::to_string(tri[c]) + " has value " +
                                  std::to_string(slice[tri[c]]));
}

} // namespace

Eigen::VectorXd average_density(const TriMesh& mesh,
                                const Eigen::Ref<const Eigen::VectorXd>& slice,
                                AveragingMode mode) {
  if (slice.size() != mesh.vertex_count())
    fail(ErrorKind::validation, "average_density: slice has wrong length");
  const int s = mesh.triangle_count();
  Eigen::VectorXd out(s);
  for (int j = 0; j < s; ++j) {
    const auto tri = mesh.triangles().row(j);
    const double a = slice[tri[0]], b = slice[tri[1]], c = slice[tri[2]];
    switch (mode) {
    case AveragingMode::arithmetic:
      out[j] = (a + b + c) / 3.0;
      break;
    case AveragingMode::geometric:
      require_positive(mesh, slice, j, "geometric");
      out[j] = std::cbrt(a * b * c);
      break;
    case AveragingMode::harmonic:
      require_positive(mesh, slice, j, "harmonic");
      out[j] = 3.0 / (1.0 / a + 1.0 / b + 1.0 / c);
      break;
    }
  }
  return out;
}

Eigen::MatrixX3d average_density_partials(const TriMesh& mesh,
                                          const Eigen::Ref<const Eigen::VectorXd>& slice,
                                          AveragingMode mode) {
  if (slice.size() != mesh.vertex_count())
    fail(ErrorKind::validation, "average_density_partials: slice has wrong length");
  const int s = mesh.triangle_count();
  Eigen::MatrixX3d out(s, 3);
  if (mode == AveragingMode::arithmetic) {
    out.setConstant(1.0 / 3.0);
    return out;
  }
  const Eigen::VectorXd avg = average_density(mesh, slice, mode);
  for (int j = 0; j < s; ++j) {
    const auto tri = mesh.triangles().row(j);
    for (int c = 0; c < 3; ++c) {
      const double x = slice[tri[c]];
      out(j, c) = mode == AveragingMode::geometric ? avg[j] / (3.0 * x)
                                                   : avg[j] * avg[j] / (3.0 * x * x);
    }
  }
  return out;
}

Eigen::MatrixXd staggered_density(const TriMesh& mesh, const DensityField& density,
                                  AveragingMode mode) {
  const int n = density.steps();
  if (n < 1)
    fail(ErrorKind::validation, "staggered_density: empty density field");
  Eigen::MatrixXd out(mesh.triangle_count(), n);
  Eigen::VectorXd previous = average_density(mesh, density.initial, mode);
  for (int k = 0; k < n; ++k) {
    const Eigen::VectorXd current = average_density(mesh, density.values.col(k), mode);
    out.col(k) = 0.5 * (current + previous);
    previous = current;
  }
  return out;
}

double slice_mass(const TriMesh& mesh, const Eigen::Ref<const Eigen::VectorXd>& slice) {
  return mesh.vertex_areas().dot(slice);
}

} // namespace mfg
