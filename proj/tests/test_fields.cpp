#include <doctest.h>

#include <cmath>

#include "mfg/errors.hpp"
#include "mfg/fields.hpp"
#include "mfg/mesh.hpp"
#include "support.hpp"

using namespace mfg;

namespace {

// Planar fan with 5 vertices and 3 triangles; enough structure for the
// weighted time inner products.
TriMesh fan_mesh() {
  Eigen::MatrixX3d v(5, 3);
  v << 0, 0, 0, 1, 0, 0, 1, 1, 0, 0, 1, 0, -1, 0.5, 0;
  Eigen::MatrixX3i f(3, 3);
  f << 0, 1, 2, 0, 2, 3, 0, 3, 4;
  return TriMesh::from_data(v, f);
}

TriMesh single_triangle() {
  Eigen::MatrixX3d v(3, 3);
  v << 0, 0, 0, 1, 0, 0, 0, 1, 0;
  Eigen::MatrixX3i f(1, 3);
  f << 0, 1, 2;
  return TriMesh::from_data(v, f);
}

double weighted_time_dot(const TriMesh& mesh, const Eigen::MatrixXd& a,
                         const Eigen::MatrixXd& b) {
  double sum = 0.0;
  for (int k = 0; k < a.cols(); ++k)
    sum += a.col(k).dot(mesh.vertex_areas().cwiseProduct(b.col(k)));
  return sum / a.cols();
}

} // namespace

TEST_CASE("time_diff of a constant-in-time density is zero") {
  auto rng = testutil::make_rng(1);
  const Eigen::VectorXd p0 = testutil::random_vector(rng, 5, 0.1, 1.0);
  const DensityField density = DensityField::constant(p0, 4);
  const Eigen::MatrixXd diff = time_diff(density.values, density.initial);
  CHECK(diff.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("time_diff plug-in cases") {
  Eigen::VectorXd p0(2);
  p0 << 0.5, 2.0;

  // n = 1, P_1 = 2 P_0: the single slice equals P_0.
  Eigen::MatrixXd doubled = 2.0 * p0;
  const Eigen::MatrixXd one = time_diff(doubled, p0);
  CHECK((one.col(0) - p0).cwiseAbs().maxCoeff() < 1e-15);

  // n = 2, P_1 = P_0, P_2 = 3 P_0: slices (0, 4 P_0).
  Eigen::MatrixXd two(2, 2);
  two.col(0) = p0;
  two.col(1) = 3.0 * p0;
  const Eigen::MatrixXd diff = time_diff(two, p0);
  CHECK(diff.col(0).cwiseAbs().maxCoeff() == 0.0);
  CHECK((diff.col(1) - 4.0 * p0).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("time_diff_adjoint telescopes constants onto the final slice") {
  const int n = 5;
  Eigen::MatrixXd psi = Eigen::MatrixXd::Constant(3, n, 1.5);
  const Eigen::MatrixXd adj = time_diff_adjoint(psi);
  for (int k = 0; k + 1 < n; ++k)
    CHECK(adj.col(k).cwiseAbs().maxCoeff() == 0.0);
  CHECK((adj.col(n - 1).array() - n * 1.5).abs().maxCoeff() < 1e-14);

  // n = 1: the single slice is n * psi = psi.
  Eigen::MatrixXd single = Eigen::MatrixXd::Constant(3, 1, 0.7);
  CHECK((time_diff_adjoint(single) - single).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("time_diff and time_diff_adjoint are adjoint for zero initial data") {
  auto rng = testutil::make_rng(2);
  const TriMesh mesh = fan_mesh();
  const int n = 4;
  const Eigen::MatrixXd p = testutil::random_matrix(rng, mesh.vertex_count(), n, -1.0, 1.0);
  const Eigen::MatrixXd psi = testutil::random_matrix(rng, mesh.vertex_count(), n, -1.0, 1.0);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(mesh.vertex_count());

  const double lhs = weighted_time_dot(mesh, time_diff(p, zero), psi);
  const double rhs = weighted_time_dot(mesh, p, time_diff_adjoint(psi));
  CHECK(std::abs(lhs - rhs) <= 1e-12 * (std::abs(lhs) + 1.0));
}

TEST_CASE("space-time integration by parts on random fields") {
  auto rng = testutil::make_rng(6);
  const TriMesh mesh = TriMesh::icosphere(1, 1.0);
  const int n = 3;
  const Eigen::MatrixXd p = testutil::random_matrix(rng, mesh.vertex_count(), n, -1.0, 1.0);
  const Eigen::MatrixXd psi = testutil::random_matrix(rng, mesh.vertex_count(), n, -1.0, 1.0);
  const FluxField m = testutil::random_flux(mesh, rng, n, 1.0);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(mesh.vertex_count());

  // <Dt P + div M, psi>_{V,t} = <P, Dt* psi>_{V,t} - <M, grad psi>_{T,t}
  Eigen::MatrixXd constraint = time_diff(p, zero);
  for (int k = 0; k < n; ++k)
    constraint.col(k) += mesh.divergence(m.values[k]);
  const double lhs = weighted_time_dot(mesh, constraint, psi);

  double rhs = weighted_time_dot(mesh, p, time_diff_adjoint(psi));
  for (int k = 0; k < n; ++k) {
    const Eigen::MatrixX3d grad = mesh.gradient(psi.col(k));
    for (int j = 0; j < mesh.triangle_count(); ++j)
      rhs -= mesh.triangle_areas()[j] * m.values[k].row(j).dot(grad.row(j)) / n;
  }
  CHECK(std::abs(lhs - rhs) <= 1e-12 * (std::abs(lhs) + 1.0));
}

TEST_CASE("average_density reproduces constants and the three means") {
  const TriMesh mesh = single_triangle();

  for (auto mode :
       {AveragingMode::arithmetic, AveragingMode::geometric, AveragingMode::harmonic}) {
    const Eigen::VectorXd constant = Eigen::VectorXd::Constant(3, 0.8);
    CHECK(average_density(mesh, constant, mode)[0] == doctest::Approx(0.8).epsilon(1e-14));
  }

  Eigen::VectorXd v123(3);
  v123 << 1.0, 2.0, 3.0;
  CHECK(average_density(mesh, v123, AveragingMode::arithmetic)[0] ==
        doctest::Approx(2.0).epsilon(1e-14));

  Eigen::VectorXd v124(3);
  v124 << 1.0, 2.0, 4.0;
  CHECK(average_density(mesh, v124, AveragingMode::geometric)[0] ==
        doctest::Approx(2.0).epsilon(1e-14));
  CHECK(average_density(mesh, v124, AveragingMode::harmonic)[0] ==
        doctest::Approx(12.0 / 7.0).epsilon(1e-14));
}

TEST_CASE("geometric and harmonic averaging reject nonpositive entries") {
  const TriMesh mesh = single_triangle();
  Eigen::VectorXd with_zero(3);
  with_zero << 1.0, 0.0, 2.0;
  CHECK_THROWS_AS(average_density(mesh, with_zero, AveragingMode::geometric), Error);
  Eigen::VectorXd with_negative(3);
  with_negative << 1.0, -0.5, 2.0;
  CHECK_THROWS_AS(average_density(mesh, with_negative, AveragingMode::harmonic), Error);
  // Arithmetic has no domain restriction.
  CHECK(average_density(mesh, with_negative, AveragingMode::arithmetic)[0] ==
        doctest::Approx((1.0 - 0.5 + 2.0) / 3.0));
}

TEST_CASE("triangle averages stay between the vertex extremes and are 1-homogeneous") {
  auto rng = testutil::make_rng(8);
  const TriMesh mesh = TriMesh::icosphere(1, 1.0);
  const Eigen::VectorXd slice = testutil::random_vector(rng, mesh.vertex_count(), 0.2, 3.0);
  for (auto mode :
       {AveragingMode::arithmetic, AveragingMode::geometric, AveragingMode::harmonic}) {
    const Eigen::VectorXd avg = average_density(mesh, slice, mode);
    for (int j = 0; j < mesh.triangle_count(); ++j) {
      const auto tri = mesh.triangles().row(j);
      const double lo = std::min({slice[tri[0]], slice[tri[1]], slice[tri[2]]});
      const double hi = std::max({slice[tri[0]], slice[tri[1]], slice[tri[2]]});
      CHECK(avg[j] >= lo - 1e-14);
      CHECK(avg[j] <= hi + 1e-14);
    }
    const Eigen::VectorXd scaled = average_density(mesh, 2.5 * slice, mode);
    CHECK((scaled - 2.5 * avg).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("average_density_partials match finite differences") {
  auto rng = testutil::make_rng(12);
  const TriMesh mesh = fan_mesh();
  Eigen::VectorXd slice = testutil::random_vector(rng, mesh.vertex_count(), 0.5, 2.0);
  const double step = 1e-7;
  for (auto mode :
       {AveragingMode::arithmetic, AveragingMode::geometric, AveragingMode::harmonic}) {
    const Eigen::MatrixX3d partials = average_density_partials(mesh, slice, mode);
    for (int j = 0; j < mesh.triangle_count(); ++j) {
      const auto tri = mesh.triangles().row(j);
      for (int c = 0; c < 3; ++c) {
        Eigen::VectorXd plus = slice, minus = slice;
        plus[tri[c]] += step;
        minus[tri[c]] -= step;
        const double fd = (average_density(mesh, plus, mode)[j] -
                           average_density(mesh, minus, mode)[j]) /
                          (2.0 * step);
        CHECK(partials(j, c) == doctest::Approx(fd).epsilon(1e-6));
      }
    }
  }
}

TEST_CASE("staggered_density averages adjacent slices") {
  const TriMesh mesh = single_triangle();

  // Uniform in space and time stays put.
  const Eigen::VectorXd uniform = Eigen::VectorXd::Constant(3, 2.0);
  const DensityField constant = DensityField::constant(uniform, 3);
  const Eigen::MatrixXd flat = staggered_density(mesh, constant, AveragingMode::arithmetic);
  CHECK((flat.array() - 2.0).abs().maxCoeff() < 1e-14);

  // n = 1 definition.
  DensityField one;
  one.initial = Eigen::VectorXd::Constant(3, 1.0);
  one.values = Eigen::MatrixXd::Constant(3, 1, 3.0);
  CHECK(staggered_density(mesh, one, AveragingMode::arithmetic)(0, 0) ==
        doctest::Approx(2.0).epsilon(1e-14));

  // n = 2 hand evaluation: slices (1.5, 3).
  DensityField two;
  two.initial = Eigen::VectorXd::Constant(3, 1.0);
  two.values.resize(3, 2);
  two.values.col(0) = Eigen::VectorXd::Constant(3, 2.0);
  two.values.col(1) = Eigen::VectorXd::Constant(3, 4.0);
  const Eigen::MatrixXd rho = staggered_density(mesh, two, AveragingMode::arithmetic);
  CHECK(rho(0, 0) == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(rho(0, 1) == doctest::Approx(3.0).epsilon(1e-14));
}

TEST_CASE("divergence-driven updates conserve total mass") {
  auto rng = testutil::make_rng(21);
  const TriMesh mesh = TriMesh::icosphere(1, 1.0);
  const int n = 4;
  const FluxField m = testutil::random_flux(mesh, rng, n, 0.5);

  // Any density satisfying the continuity relation keeps the initial mass.
  Eigen::VectorXd p0 = testutil::random_probability(mesh, rng);
  DensityField density;
  density.initial = p0;
  density.values.resize(mesh.vertex_count(), n);
  Eigen::VectorXd previous = p0;
  for (int k = 0; k < n; ++k) {
    previous -= mesh.divergence(m.values[k]) / n;
    density.values.col(k) = previous;
  }
  for (int k = 0; k < n; ++k)
    CHECK(slice_mass(mesh, density.values.col(k)) == doctest::Approx(1.0).epsilon(1e-12));
}
