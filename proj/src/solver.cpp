#include <chrono>
#include <cmath>
#include <memory>
#include <optional>
#include <string>

#include "mfg/errors.hpp"
#include "mfg/solver.hpp"

namespace mfg {

double field_norm(const TriMesh& mesh, const Eigen::Ref<const Eigen::MatrixXd>& slices) {
  const int n = static_cast<int>(slices.cols());
  double sum = 0.0;
  for (int k = 0; k < n; ++k)
    sum += slices.col(k).dot(mesh.vertex_areas().cwiseProduct(slices.col(k)));
  return std::sqrt(sum / n);
}

double flux_norm(const TriMesh& mesh, const std::vector<Eigen::MatrixX3d>& slices) {
  const int n = static_cast<int>(slices.size());
  double sum = 0.0;
  for (const auto& m : slices)
    sum += mesh.triangle_areas().dot(m.rowwise().squaredNorm());
  return std::sqrt(sum / n);
}

Eigen::MatrixXd continuity_residual(const TriMesh& mesh, const DensityField& density,
                                    const FluxField& flux) {
  Eigen::MatrixXd residual = time_diff(density.values, density.initial);
  for (int k = 0; k < density.steps(); ++k)
    residual.col(k) += mesh.divergence(flux.values[k]);
  return residual;
}

std::pair<Eigen::MatrixXd, std::vector<Eigen::MatrixX3d>>
gradient_step(const TriMesh& mesh, const CostSpec& spec, const DensityField& density,
              const FluxField& flux, double eta) {
  if (!(eta >= 0.0))
    fail(ErrorKind::validation, "gradient_step: step size must be nonnegative");
  const CostGradient grad = objective_gradient(mesh, spec, density, flux);
  Eigen::MatrixXd density_half = density.values - eta * grad.density;
  std::vector<Eigen::MatrixX3d> flux_half(flux.values.size());
  for (size_t k = 0; k < flux.values.size(); ++k)
    flux_half[k] = flux.values[k] - eta * grad.flux[k];
  return {std::move(density_half), std::move(flux_half)};
}

KktResidual kkt_residual(const TriMesh& mesh, const CostSpec& spec,
                         const ProjectionOperator& op, const DensityField& density,
                         const FluxField& flux) {
  const int n = density.steps();
  if (op.steps() != n)
    fail(ErrorKind::validation, "kkt_residual: operator built for a different step count");

  const CostGradient grad = objective_gradient(mesh, spec, density, flux);

  // Gradients scaled to per-area densities.
  Eigen::MatrixXd scaled_density(grad.density.rows(), n);
  for (int k = 0; k < n; ++k)
    scaled_density.col(k) = grad.density.col(k).cwiseQuotient(mesh.vertex_areas());
  std::vector<Eigen::MatrixX3d> scaled_flux(n);
  for (int k = 0; k < n; ++k)
    scaled_flux[k] = grad.flux[k].array().colwise() / mesh.triangle_areas().array();

  // Least-squares multiplier from the stationarity conditions.
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(mesh.vertex_count());
  Eigen::MatrixXd rhs = time_diff(scaled_density, zero);
  for (int k = 0; k < n; ++k)
    rhs.col(k) += mesh.divergence(scaled_flux[k]);
  const DualField psi = op.solve(rhs);

  const Eigen::MatrixXd dual_step = time_diff_adjoint(psi);
  const Eigen::MatrixXd density_defect =
      (scaled_density - dual_step).cwiseMin(density.values);

  std::vector<Eigen::MatrixX3d> flux_defect(n);
  for (int k = 0; k < n; ++k)
    flux_defect[k] = scaled_flux[k] + mesh.gradient(psi.col(k));

  KktResidual out;
  out.density = field_norm(mesh, density_defect);
  out.flux = flux_norm(mesh, flux_defect);
  out.continuity = field_norm(mesh, continuity_residual(mesh, density, flux));
  return out;
}

namespace {

const char* nonfinite_term(const CostBreakdown& costs) {
  if (!std::isfinite(costs.dynamic))
    return "dynamic";
  if (!std::isfinite(costs.interaction))
    return "interaction";
  if (!std::isfinite(costs.terminal))
    return "terminal";
  return nullptr;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

struct Iterate {
  DensityField density;
  FluxField flux;
  CostBreakdown costs;
};

double product_distance(const TriMesh& mesh, const Iterate& a, const DensityField& p,
                        const FluxField& m) {
  const double dp = field_norm(mesh, a.density.values - p.values);
  std::vector<Eigen::MatrixX3d> dm(m.values.size());
  for (size_t k = 0; k < m.values.size(); ++k)
    dm[k] = a.flux.values[k] - m.values[k];
  const double df = flux_norm(mesh, dm);
  return std::sqrt(dp * dp + df * df);
}

} // namespace

SolveResult pgd_solve(const TriMesh& mesh, const CostSpec& spec,
                      const Eigen::VectorXd& initial_density, int steps,
                      const SolveOptions& options, const ProjectionOperator* shared_op) {
  if (options.iterations < 1)
    fail(ErrorKind::validation, "pgd_solve: need at least one iteration");
  if (!(options.step_size > 0.0))
    fail(ErrorKind::validation, "pgd_solve: step size must be positive");
  if (initial_density.size() != mesh.vertex_count())
    fail(ErrorKind::validation, "pgd_solve: initial density has wrong length");
  if ((initial_density.array() < 0.0).any())
    fail(ErrorKind::validation, "pgd_solve: initial density must be nonnegative");
  const double initial_mass = slice_mass(mesh, initial_density);
  if (std::abs(initial_mass - 1.0) > 1e-8)
    fail(ErrorKind::validation, "pgd_solve: initial density must have unit mass, got " +
                                    std::to_string(initial_mass));
  spec.validate(mesh);

  SolveReport report;

  auto t0 = std::chrono::steady_clock::now();
  std::optional<ProjectionOperator> own_op;
  if (shared_op == nullptr) {
    own_op.emplace(mesh, steps);
    shared_op = &*own_op;
  } else if (shared_op->steps() != steps ||
             shared_op->vertex_count() != mesh.vertex_count()) {
    fail(ErrorKind::validation, "pgd_solve: shared operator does not match (mesh, steps)");
  }
  const ProjectionOperator& op = *shared_op;
  report.precompute_seconds = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();

  Iterate current;
  {
    const DensityField start = DensityField::constant(initial_density, steps);
    const FluxField rest = FluxField::zero(mesh.triangle_count(), steps);
    auto [p, m] = project(op, mesh, start.values, rest.values, initial_density);
    current = {std::move(p), std::move(m), {}};
  }

  report.min_density = std::min(initial_density.minCoeff(), current.density.values.minCoeff());

  auto track_feasibility = [&](const Iterate& it) {
    const double res = field_norm(mesh, continuity_residual(mesh, it.density, it.flux));
    report.max_continuity_residual = std::max(report.max_continuity_residual, res);
    for (int k = 0; k < steps; ++k) {
      const double mass = slice_mass(mesh, it.density.values.col(k));
      report.max_mass_error = std::max(report.max_mass_error, std::abs(mass - initial_mass));
    }
    report.min_density = std::min(report.min_density, it.density.values.minCoeff());
  };

  auto evaluate = [&](Iterate& it, int iteration) {
    it.costs = objective(mesh, spec, it.density, it.flux);
    if (const char* term = nonfinite_term(it.costs))
      fail(ErrorKind::solver, std::string("objective ") + term +
                                  " term is non-finite at iteration " +
                                  std::to_string(iteration));
  };

  evaluate(current, 0);
  track_feasibility(current);
  report.objective_trace.push_back(current.costs.total);

  report.kkt_initial = kkt_residual(mesh, spec, op, current.density, current.flux);
  report.kkt_first_iteration = report.kkt_initial;
  report.kkt_final = report.kkt_initial;

  bool converged = options.tolerance > 0.0 && report.kkt_initial.max() <= options.tolerance;

  int iteration = 0;
  while (!converged && iteration < options.iterations) {
    ++iteration;

    double eta = options.step_size;
    Iterate candidate;
    bool moved = false;
    for (int attempt = 0; attempt < (options.line_search ? 30 : 1); ++attempt) {
      auto [p_half, m_half] = gradient_step(mesh, spec, current.density, current.flux, eta);
      auto [p, m] = project(op, mesh, p_half, m_half, current.density.initial);
      candidate = {std::move(p), std::move(m), {}};
      evaluate(candidate, iteration);
      if (!options.line_search) {
        moved = true;
        break;
      }
      const double dist = product_distance(mesh, candidate, current.density, current.flux);
      if (candidate.costs.total <= current.costs.total - 1e-4 / eta * dist * dist) {
        moved = true;
        break;
      }
      eta *= 0.5;
    }
    if (options.line_search && !moved)
      moved = candidate.costs.total <= current.costs.total; // plain monotone fallback

    if (moved)
      current = std::move(candidate);
    track_feasibility(current);
    report.objective_trace.push_back(current.costs.total);

    const bool check_kkt =
        iteration == 1 ||
        (options.tolerance > 0.0 && options.kkt_every > 0 && iteration % options.kkt_every == 0);
    if (check_kkt) {
      const KktResidual kkt = kkt_residual(mesh, spec, op, current.density, current.flux);
      if (iteration == 1)
        report.kkt_first_iteration = kkt;
      if (options.tolerance > 0.0 && kkt.max() <= options.tolerance) {
        report.kkt_final = kkt;
        converged = true;
      }
    }
  }

  if (!converged || iteration == 0)
    report.kkt_final = kkt_residual(mesh, spec, op, current.density, current.flux);
  report.iterations_run = iteration;
  report.final_costs = current.costs;
  report.solve_seconds = seconds_since(t0);

  return {std::move(current.density), std::move(current.flux), std::move(report)};
}

} // namespace mfg
