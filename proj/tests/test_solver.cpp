#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>

#include "mfg/errors.hpp"
#include "mfg/solver.hpp"
#include "support.hpp"

using namespace mfg;

namespace {

CostSpec vanilla_quadratic(const Eigen::VectorXd& target, double weight = 1.0) {
  CostSpec spec;
  spec.terminal = TerminalKind::quadratic;
  spec.terminal_weight = weight;
  spec.target = target;
  return spec;
}

Eigen::VectorXd uniform_density(const TriMesh& mesh) {
  return Eigen::VectorXd::Constant(mesh.vertex_count(), 1.0 / mesh.total_area());
}

// Dense n x n matrix of the squared time-difference operator.
Eigen::MatrixXd time_block(int n) {
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(n, n);
  const double nsq = static_cast<double>(n) * n;
  for (int k = 0; k < n; ++k) {
    t(k, k) = (k == 0 ? 1.0 : 2.0) * nsq;
    if (k + 1 < n) {
      t(k, k + 1) = -nsq;
      t(k + 1, k) = -nsq;
    }
  }
  return t;
}

} // namespace

TEST_CASE("projection operator solves the zero system trivially") {
  const TriMesh mesh = TriMesh::icosphere(1, 1.0);
  const ProjectionOperator op(mesh, 1);
  const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(mesh.vertex_count(), 1);
  CHECK(op.solve(zero).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("projection operator round-trips random dual fields") {
  auto rng = testutil::make_rng(23);
  const TriMesh mesh = TriMesh::icosphere(1, 1.0);
  const int n = 3;
  const ProjectionOperator op(mesh, n);
  const Eigen::MatrixXd psi =
      testutil::random_matrix(rng, mesh.vertex_count(), n, -1.0, 1.0);

  const Eigen::MatrixXd back = op.solve(op.apply(psi));
  CHECK((back - psi).cwiseAbs().maxCoeff() <= 1e-10 * (psi.cwiseAbs().maxCoeff() + 1.0));

  const Eigen::MatrixXd rhs = testutil::random_matrix(rng, mesh.vertex_count(), n, -1.0, 1.0);
  const Eigen::MatrixXd forward = op.apply(op.solve(rhs));
  CHECK((forward - rhs).cwiseAbs().maxCoeff() <= 1e-10 * (rhs.cwiseAbs().maxCoeff() + 1.0));
}

TEST_CASE("constant-in-space right-hand sides reduce to the time-only system") {
  auto rng = testutil::make_rng(29);
  const TriMesh mesh = TriMesh::icosphere(1, 1.0);
  const int n = 4;
  const ProjectionOperator op(mesh, n);

  const Eigen::VectorXd c = testutil::random_vector(rng, n, -2.0, 2.0);
  Eigen::MatrixXd rhs(mesh.vertex_count(), n);
  for (int k = 0; k < n; ++k)
    rhs.col(k).setConstant(c[k]);

  const Eigen::MatrixXd psi = op.solve(rhs);
  const Eigen::VectorXd expected = time_block(n).fullPivLu().solve(c);
  for (int k = 0; k < n; ++k) {
    CHECK(psi.col(k).maxCoeff() - psi.col(k).minCoeff() < 1e-10);
    CHECK(psi(0, k) == doctest::Approx(expected[k]).epsilon(1e-10));
  }
}

TEST_CASE("projection of a feasible point is the identity") {
  const TriMesh mesh = TriMesh::icosphere(1, 1.0);
  const int n = 3;
  const ProjectionOperator op(mesh, n);
  const Eigen::VectorXd p0 = uniform_density(mesh);

  // Constant-in-time density with zero flux satisfies the constraints.
  const DensityField rest = DensityField::constant(p0, n);
  const FluxField none = FluxField::zero(mesh.triangle_count(), n);
  auto [p, m] = project(op, mesh, rest.values, none.values, p0);
  CHECK((p.values - rest.values).cwiseAbs().maxCoeff() < 1e-10);
  for (int k = 0; k < n; ++k)
    CHECK(m.values[k].cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("projection is idempotent and restores continuity and mass") {
  auto rng = testutil::make_rng(37);
  const TriMesh mesh = TriMesh::icosphere(1, 1.0);
  const int n = 4;
  const ProjectionOperator op(mesh, n);
  const Eigen::VectorXd p0 = testutil::random_probability(mesh, rng);

  const Eigen::MatrixXd p_target =
      testutil::random_matrix(rng, mesh.vertex_count(), n, 0.0, 0.4);
  const FluxField m_target = testutil::random_flux(mesh, rng, n, 0.5);

  auto [p, m] = project(op, mesh, p_target, m_target.values, p0);

  DensityField density = p;
  FluxField flux = m;
  const double residual = field_norm(mesh, continuity_residual(mesh, density, flux));
  CHECK(residual <= 1e-8);
  for (int k = 0; k < n; ++k)
    CHECK(slice_mass(mesh, p.values.col(k)) == doctest::Approx(1.0).epsilon(1e-8));

  auto [p2, m2] = project(op, mesh, p.values, m.values, p0);
  CHECK((p2.values - p.values).cwiseAbs().maxCoeff() <= 1e-10);
  for (int k = 0; k < n; ++k)
    CHECK((m2.values[k] - m.values[k]).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("projection returns the closest feasible point") {
  auto rng = testutil::make_rng(41);
  const TriMesh mesh = TriMesh::icosphere(1, 1.0);
  const int n = 3;
  const ProjectionOperator op(mesh, n);
  const Eigen::VectorXd p0 = testutil::random_probability(mesh, rng);

  const Eigen::MatrixXd p_target =
      testutil::random_matrix(rng, mesh.vertex_count(), n, 0.0, 0.4);
  const FluxField m_target = testutil::random_flux(mesh, rng, n, 0.5);
  auto [p, m] = project(op, mesh, p_target, m_target.values, p0);

  auto distance_to_target = [&](const DensityField& density, const FluxField& flux) {
    const double dp = field_norm(mesh, density.values - p_target);
    std::vector<Eigen::MatrixX3d> dm(n);
    for (int k = 0; k < n; ++k)
      dm[k] = flux.values[k] - m_target.values[k];
    const double df = flux_norm(mesh, dm);
    return std::sqrt(dp * dp + df * df);
  };
  const double base = distance_to_target(p, m);

  // Feasible perturbations: pick any flux change and integrate the matching
  // density change (zero at the initial slice).
  for (int trial = 0; trial < 100; ++trial) {
    const FluxField dm = testutil::random_flux(mesh, rng, n, 0.05);
    DensityField p_shift = p;
    FluxField m_shift = m;
    Eigen::VectorXd carried = Eigen::VectorXd::Zero(mesh.vertex_count());
    for (int k = 0; k < n; ++k) {
      m_shift.values[k] += dm.values[k];
      carried -= mesh.divergence(dm.values[k]) / n;
      p_shift.values.col(k) += carried;
    }
    const double residual =
        field_norm(mesh, continuity_residual(mesh, p_shift, m_shift));
    REQUIRE(residual <= 1e-8);
    CHECK(distance_to_target(p_shift, m_shift) >= base - 1e-12);
  }
}

TEST_CASE("gradient_step is the identity at zero gradient or zero step") {
  const TriMesh mesh = TriMesh::icosphere(0, 1.0);
  const Eigen::VectorXd p0 = uniform_density(mesh);
  const CostSpec spec = vanilla_quadratic(p0, 2.0);
  const DensityField density = DensityField::constant(p0, 2);
  const FluxField flux = FluxField::zero(mesh.triangle_count(), 2);

  auto [p_half, m_half] = gradient_step(mesh, spec, density, flux, 0.5);
  CHECK((p_half - density.values).cwiseAbs().maxCoeff() == 0.0);
  for (int k = 0; k < 2; ++k)
    CHECK(m_half[k].cwiseAbs().maxCoeff() == 0.0);

  auto rng = testutil::make_rng(43);
  const DensityField rough = testutil::random_density(mesh, rng, 2, 0.2, 0.6);
  auto [p_same, m_same] = gradient_step(mesh, spec, rough, flux, 0.0);
  CHECK((p_same - rough.values).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("gradient_step applies the hand-computed single-triangle update") {
  Eigen::MatrixX3d v(3, 3);
  v << 0, 0, 0, 1, 0, 0, 0, 1, 0;
  Eigen::MatrixX3i f(1, 3);
  f << 0, 1, 2;
  const TriMesh mesh = TriMesh::from_data(v, f);

  const Eigen::VectorXd ones = Eigen::VectorXd::Constant(3, 1.0);
  const DensityField density = DensityField::constant(ones, 1);
  FluxField flux = FluxField::zero(1, 1);
  flux.values[0](0, 0) = 1.0;

  CostSpec spec = vanilla_quadratic(ones / slice_mass(mesh, ones), 0.0);
  const double eta = 2.0;
  auto [p_half, m_half] = gradient_step(mesh, spec, density, flux, eta);
  // gM = A_T * M / rho = 0.5, so M goes from 1 to 1 - 2*0.5 = 0.
  CHECK(m_half[0](0, 0) == doctest::Approx(0.0).epsilon(1e-14));
  // gP distributes -A_T |M|^2 / (2 rho^2) with weight (1/2)(1/3) per vertex
  // onto the only variable slice: -0.25/6 = -1/24.
  CHECK(p_half(0, 0) == doctest::Approx(1.0 + eta / 24.0).epsilon(1e-12));
}

TEST_CASE("kkt residual vanishes at a stationary feasible point") {
  const TriMesh mesh = TriMesh::icosphere(1, 1.0);
  const int n = 3;
  const ProjectionOperator op(mesh, n);
  const Eigen::VectorXd p0 = uniform_density(mesh);
  const CostSpec spec = vanilla_quadratic(p0, 2.0);

  const DensityField density = DensityField::constant(p0, n);
  const FluxField flux = FluxField::zero(mesh.triangle_count(), n);
  const KktResidual kkt = kkt_residual(mesh, spec, op, density, flux);
  CHECK(kkt.density <= 1e-8);
  CHECK(kkt.flux <= 1e-8);
  CHECK(kkt.continuity <= 1e-8);
  CHECK(kkt.max() <= 1e-8);
  CHECK(kkt.min() <= kkt.max());
}

TEST_CASE("continuity defect is tiny after any projection") {
  auto rng = testutil::make_rng(47);
  const TriMesh mesh = TriMesh::icosphere(1, 1.0);
  const int n = 3;
  const ProjectionOperator op(mesh, n);
  const Eigen::VectorXd p0 = testutil::random_probability(mesh, rng);
  const CostSpec spec = vanilla_quadratic(p0, 2.0);

  const Eigen::MatrixXd p_target =
      testutil::random_matrix(rng, mesh.vertex_count(), n, 0.05, 0.5);
  const FluxField m_target = testutil::random_flux(mesh, rng, n, 0.4);
  auto [p, m] = project(op, mesh, p_target, m_target.values, p0);
  const KktResidual kkt = kkt_residual(mesh, spec, op, p, m);
  CHECK(kkt.continuity <= 1e-8); // feasibility, regardless of optimality
  CHECK(kkt.max() > 0.0);        // but the point is not stationary
}

TEST_CASE("stationary start terminates at iteration zero") {
  const TriMesh mesh = TriMesh::icosphere(1, 1.0);
  const Eigen::VectorXd p0 = uniform_density(mesh);
  const CostSpec spec = vanilla_quadratic(p0, 2.0);

  SolveOptions options;
  options.iterations = 50;
  options.step_size = 0.5;
  options.tolerance = 1e-8;
  const SolveResult result = pgd_solve(mesh, spec, p0, 4, options);

  CHECK(result.report.iterations_run == 0);
  CHECK(result.report.objective_trace.size() == 1);
  CHECK(result.report.final_costs.total <= 1e-12);
  CHECK(result.report.kkt_final.max() <= 1e-8);
  CHECK((result.density.values.colwise() - p0).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("solves are deterministic apart from wall-clock fields") {
  auto rng = testutil::make_rng(51);
  const TriMesh mesh = TriMesh::icosphere(1, 1.0);
  Eigen::VectorXd p0 = testutil::random_probability(mesh, rng);
  Eigen::VectorXd p1 = testutil::random_probability(mesh, rng);
  CostSpec spec = vanilla_quadratic(p1, 5.0);
  spec.interaction = InteractionKind::entropy;
  spec.interaction_weight = 0.3;

  SolveOptions options;
  options.iterations = 25;
  options.step_size = 0.1;
  options.deterministic = true;

  const SolveResult a = pgd_solve(mesh, spec, p0, 3, options);
  const SolveResult b = pgd_solve(mesh, spec, p0, 3, options);

  CHECK(a.report.objective_trace == b.report.objective_trace);
  CHECK(a.report.final_costs.total == b.report.final_costs.total);
  CHECK(a.report.kkt_final.density == b.report.kkt_final.density);
  CHECK(a.report.kkt_final.flux == b.report.kkt_final.flux);
  CHECK(a.report.kkt_final.continuity == b.report.kkt_final.continuity);
  CHECK(a.report.min_density == b.report.min_density);
  CHECK((a.density.values - b.density.values).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("line search keeps the objective trace non-increasing") {
  auto rng = testutil::make_rng(53);
  const TriMesh mesh = TriMesh::icosphere(1, 1.0);
  const Eigen::VectorXd p0 = testutil::random_probability(mesh, rng);
  const Eigen::VectorXd p1 = testutil::random_probability(mesh, rng);
  const CostSpec spec = vanilla_quadratic(p1, 10.0);

  SolveOptions options;
  options.iterations = 60;
  options.step_size = 8.0; // deliberately too large; backtracking must rein it in
  options.line_search = true;
  const SolveResult result = pgd_solve(mesh, spec, p0, 3, options);

  const auto& trace = result.report.objective_trace;
  for (size_t l = 1; l < trace.size(); ++l)
    CHECK(trace[l] <= trace[l - 1] + 1e-12);
}

TEST_CASE("iterations stay feasible and reduce the KKT residual") {
  auto rng = testutil::make_rng(59);
  const TriMesh mesh = TriMesh::icosphere(1, 1.0);
  const Eigen::VectorXd p0 = testutil::random_probability(mesh, rng);
  const Eigen::VectorXd p1 = testutil::random_probability(mesh, rng);
  const CostSpec spec = vanilla_quadratic(p1, 10.0);

  SolveOptions options;
  options.iterations = 300;
  options.step_size = 0.05;
  const SolveResult result = pgd_solve(mesh, spec, p0, 3, options);

  CHECK(result.report.max_continuity_residual <= 1e-8);
  CHECK(result.report.max_mass_error <= 1e-8);
  CHECK(result.report.kkt_final.max() <
        result.report.kkt_first_iteration.max());
  CHECK(result.report.kkt_final.continuity <= 1e-8);
  // Flux slices stay tangent without any re-projection.
  for (int k = 0; k < 3; ++k)
    for (int j = 0; j < mesh.triangle_count(); ++j) {
      const double normal_part =
          std::abs(mesh.triangle_normal(j).dot(result.flux.values[k].row(j)));
      CHECK(normal_part <= 1e-10 * (1.0 + result.flux.values[k].row(j).norm()));
    }
}

TEST_CASE("solver rejects invalid options and densities") {
  const TriMesh mesh = TriMesh::icosphere(0, 1.0);
  const Eigen::VectorXd p0 = uniform_density(mesh);
  const CostSpec spec = vanilla_quadratic(p0, 1.0);

  SolveOptions options;
  options.iterations = 0;
  CHECK_THROWS_AS(pgd_solve(mesh, spec, p0, 2, options), Error);

  options.iterations = 10;
  options.step_size = -1.0;
  CHECK_THROWS_AS(pgd_solve(mesh, spec, p0, 2, options), Error);

  options.step_size = 0.5;
  CHECK_THROWS_AS(pgd_solve(mesh, spec, 2.0 * p0, 2, options), Error); // mass 2
}

TEST_CASE("shared projection operators must match the solve") {
  const TriMesh mesh = TriMesh::icosphere(0, 1.0);
  const Eigen::VectorXd p0 = uniform_density(mesh);
  const CostSpec spec = vanilla_quadratic(p0, 1.0);
  const ProjectionOperator op(mesh, 3);
  SolveOptions options;
  options.iterations = 5;
  CHECK_THROWS_AS(pgd_solve(mesh, spec, p0, 2, options, &op), Error);
  CHECK_NOTHROW(pgd_solve(mesh, spec, p0, 3, options, &op));
}
