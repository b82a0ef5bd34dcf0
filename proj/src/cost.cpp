#include "mfg/cost.hpp"

#include <cmath>
#include <string>

#include "mfg/errors.hpp"

namespace mfg {

namespace {

const char* interaction_name(InteractionKind kind) {
  switch (kind) {
  case InteractionKind::vanilla: return "vanilla";
  case InteractionKind::obstacle: return "obstacle";
  case InteractionKind::entropy: return "entropy";
  case InteractionKind::congestion: return "congestion";
  case InteractionKind::nonlocal: return "nonlocal";
  case InteractionKind::dirichlet: return "dirichlet";
  }
  return "?";
}

// x log x extended by continuity: zero at and below zero.
double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

void check_indicator(const Eigen::VectorXd& b, int h, const char* what) {
  if (b.size() != h)
    fail(ErrorKind::validation, std::string(what) + " indicator has wrong length");
  if ((b.array() < 0.0).any() || (b.array() > 1.0).any())
    fail(ErrorKind::validation, std::string(what) + " indicator must lie in [0, 1]");
}

} // namespace

void CostSpec::validate(const TriMesh& mesh) const {
  const int h = mesh.vertex_count();
  if (interaction_weight < 0.0 || terminal_weight < 0.0)
    fail(ErrorKind::validation, "cost weights must be nonnegative");
  if (!(density_floor > 0.0))
    fail(ErrorKind::validation, "density floor must be positive");

  switch (interaction) {
  case InteractionKind::obstacle:
    check_indicator(obstacle, h, "obstacle");
    break;
  case InteractionKind::congestion:
    if (!(congestion_floor > 0.0))
      fail(ErrorKind::validation, "congestion floor must be positive");
    break;
  case InteractionKind::nonlocal:
  case InteractionKind::dirichlet:
    if (!kernel || kernel->size() != h)
      fail(ErrorKind::validation,
           std::string(interaction_name(interaction)) + " interaction needs an h x h kernel");
    break;
  default:
    break;
  }

  switch (terminal) {
  case TerminalKind::quadratic:
  case TerminalKind::kl: {
    if (target.size() != h)
      fail(ErrorKind::validation, "terminal target density has wrong length");
    if ((target.array() < 0.0).any())
      fail(ErrorKind::validation, "terminal target density must be nonnegative");
    const double mass = slice_mass(mesh, target);
    if (std::abs(mass - 1.0) > 1e-8)
      fail(ErrorKind::validation,
           "terminal target density must have unit mass, got " + std::to_string(mass));
    break;
  }
  case TerminalKind::obstacle_region:
    check_indicator(terminal_region, h, "terminal region");
    break;
  }
}

double interaction_value(const TriMesh& mesh, const CostSpec& spec,
                         const Eigen::Ref<const Eigen::VectorXd>& slice) {
  if (slice.size() != mesh.vertex_count())
    fail(ErrorKind::validation, "interaction_value: slice has wrong length");
  const Eigen::VectorXd& area = mesh.vertex_areas();
  const double w = spec.interaction_weight;

  switch (spec.interaction) {
  case InteractionKind::vanilla:
    return 0.0;
  case InteractionKind::obstacle:
    return w * area.dot(slice.cwiseProduct(spec.obstacle));
  case InteractionKind::entropy: {
    // x log x extended by zero at and below zero; undershoots from the
    // unconstrained projection carry no cost and stay visible through the
    // reported minimum density.
    double sum = 0.0;
    for (Eigen::Index i = 0; i < slice.size(); ++i)
      sum += area[i] * xlogx(slice[i]);
    return w * sum;
  }
  case InteractionKind::congestion: {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < slice.size(); ++i)
      sum += area[i] * std::sqrt(std::max(slice[i] + spec.congestion_floor, 0.0));
    return w * sum;
  }
  case InteractionKind::nonlocal:
  case InteractionKind::dirichlet: {
    const Eigen::VectorXd weighted = area.cwiseProduct(slice);
    return 0.5 * w * weighted.dot(spec.kernel->weights() * weighted);
  }
  }
  return 0.0;
}

double terminal_value(const TriMesh& mesh, const CostSpec& spec,
                      const Eigen::Ref<const Eigen::VectorXd>& last) {
  if (last.size() != mesh.vertex_count())
    fail(ErrorKind::validation, "terminal_value: slice has wrong length");
  const Eigen::VectorXd& area = mesh.vertex_areas();
  const double w = spec.terminal_weight;

  switch (spec.terminal) {
  case TerminalKind::quadratic:
    return w * area.dot((last - spec.target).array().square().matrix());
  case TerminalKind::kl: {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < last.size(); ++i) {
      const double p = last[i];
      const double q = spec.target[i];
      if (p <= 0.0)
        continue;
      if (q <= 0.0) {
        if (p > spec.density_floor)
          fail(ErrorKind::domain, "kl terminal: target vanishes at vertex " +
                                      std::to_string(i) + " where the density is positive");
        continue;
      }
      sum += area[i] * p * std::log(p / q);
    }
    return w * sum;
  }
  case TerminalKind::obstacle_region:
    return w * area.dot(last.cwiseProduct(spec.terminal_region));
  }
  return 0.0;
}

namespace {

// Gradients of the slice functionals; logs and roots use the clamped
// argument so the values stay finite near (and slightly below) zero.
Eigen::VectorXd interaction_slice_gradient(const TriMesh& mesh, const CostSpec& spec,
                                           const Eigen::Ref<const Eigen::VectorXd>& slice) {
  const Eigen::VectorXd& area = mesh.vertex_areas();
  const double w = spec.interaction_weight;
  const int h = mesh.vertex_count();

  switch (spec.interaction) {
  case InteractionKind::vanilla:
    return Eigen::VectorXd::Zero(h);
  case InteractionKind::obstacle:
    return w * area.cwiseProduct(spec.obstacle);
  case InteractionKind::entropy: {
    Eigen::VectorXd out(h);
    for (int i = 0; i < h; ++i)
      out[i] = w * area[i] * (std::log(std::max(slice[i], spec.density_floor)) + 1.0);
    return out;
  }
  case InteractionKind::congestion: {
    Eigen::VectorXd out(h);
    for (int i = 0; i < h; ++i) {
      const double u = slice[i] + spec.congestion_floor;
      out[i] = u > spec.density_floor ? w * area[i] / (2.0 * std::sqrt(u)) : 0.0;
    }
    return out;
  }
  case InteractionKind::nonlocal:
  case InteractionKind::dirichlet:
    return w * area.cwiseProduct(spec.kernel->weights() * area.cwiseProduct(slice));
  }
  return Eigen::VectorXd::Zero(h);
}

Eigen::VectorXd terminal_slice_gradient(const TriMesh& mesh, const CostSpec& spec,
                                        const Eigen::Ref<const Eigen::VectorXd>& last) {
  const Eigen::VectorXd& area = mesh.vertex_areas();
  const double w = spec.terminal_weight;
  const int h = mesh.vertex_count();

  switch (spec.terminal) {
  case TerminalKind::quadratic:
    return 2.0 * w * area.cwiseProduct(last - spec.target);
  case TerminalKind::kl: {
    Eigen::VectorXd out(h);
    for (int i = 0; i < h; ++i) {
      const double p = std::max(last[i], spec.density_floor);
      const double q = spec.target[i];
      if (q <= 0.0) {
        if (last[i] > spec.density_floor)
          fail(ErrorKind::domain, "kl terminal: target vanishes at vertex " +
                                      std::to_string(i) + " where the density is positive");
        out[i] = 0.0;
        continue;
      }
      out[i] = w * area[i] * (std::log(p / q) + 1.0);
    }
    return out;
  }
  case TerminalKind::obstacle_region:
    return w * area.cwiseProduct(spec.terminal_region);
  }
  return Eigen::VectorXd::Zero(h);
}

} // namespace

CostBreakdown objective(const TriMesh& mesh, const CostSpec& spec,
                        const DensityField& density, const FluxField& flux) {
  const int n = density.steps();
  if (flux.steps() != n)
    fail(ErrorKind::validation, "objective: density and flux disagree on the step count");

  CostBreakdown out;
  const Eigen::MatrixXd rho = staggered_density(mesh, density, spec.averaging);
  const Eigen::VectorXd& tri_area = mesh.triangle_areas();
  const int s = mesh.triangle_count();

  double dynamic = 0.0;
  for (int k = 0; k < n; ++k) {
    const Eigen::MatrixX3d& m = flux.values[k];
    for (int j = 0; j < s; ++j) {
      const double m2 = m.row(j).squaredNorm();
      if (m2 == 0.0)
        continue; // zero flux carries zero cost even at vanishing density
      dynamic += tri_area[j] * m2 / (2.0 * std::max(rho(j, k), spec.density_floor));
    }
  }
  out.dynamic = dynamic / n;

  double interaction = 0.0;
  for (int k = 0; k + 1 < n; ++k)
    interaction += interaction_value(mesh, spec, density.values.col(k));
  out.interaction = interaction / n;

  out.terminal = terminal_value(mesh, spec, density.values.col(n - 1));
  out.total = out.dynamic + out.interaction + out.terminal;
  return out;
}

CostGradient objective_gradient(const TriMesh& mesh, const CostSpec& spec,
                                const DensityField& density, const FluxField& flux) {
  const int n = density.steps();
  if (flux.steps() != n)
    fail(ErrorKind::validation, "objective_gradient: density and flux disagree on the step count");
  const int s = mesh.triangle_count();
  const int h = mesh.vertex_count();
  const Eigen::VectorXd& tri_area = mesh.triangle_areas();

  CostGradient grad;
  grad.density = Eigen::MatrixXd::Zero(h, n);
  grad.flux.assign(n, Eigen::MatrixX3d::Zero(s, 3));

  const Eigen::MatrixXd rho = staggered_density(mesh, density, spec.averaging);

  // Averaging partials per central slice (slice 0 is fixed and carries none).
  std::vector<Eigen::MatrixX3d> partials(n);
  for (int k = 0; k < n; ++k)
    partials[k] = average_density_partials(mesh, density.values.col(k), spec.averaging);

  for (int k = 0; k < n; ++k) {
    const Eigen::MatrixX3d& m = flux.values[k];
    Eigen::MatrixX3d& gm = grad.flux[k];
    for (int j = 0; j < s; ++j) {
      const double r = rho(j, k);
      const double reff = std::max(r, spec.density_floor);
      gm.row(j) = (tri_area[j] / (n * reff)) * m.row(j);
      if (r <= spec.density_floor)
        continue; // flat branch of the clamped density
      const double m2 = m.row(j).squaredNorm();
      if (m2 == 0.0)
        continue;
      const double coef = -tri_area[j] * m2 / (2.0 * n * reff * reff);
      const auto tri = mesh.triangles().row(j);
      // The staggered density averages the slices at t_k and t_{k-1}.
      for (int c = 0; c < 3; ++c) {
        grad.density(tri[c], k) += coef * 0.5 * partials[k](j, c);
        if (k > 0)
          grad.density(tri[c], k - 1) += coef * 0.5 * partials[k - 1](j, c);
      }
    }
  }

  for (int k = 0; k + 1 < n; ++k)
    grad.density.col(k) +=
        interaction_slice_gradient(mesh, spec, density.values.col(k)) / n;
  grad.density.col(n - 1) += terminal_slice_gradient(mesh, spec, density.values.col(n - 1));

  return grad;
}

} // namespace mfg
