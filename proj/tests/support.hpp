#pragma once

#include <Eigen/Core>

#include <random>
#include <vector>

#include "mfg/fields.hpp"
#include "mfg/mesh.hpp"

namespace testutil {

inline std::mt19937 make_rng(unsigned seed) { return std::mt19937(seed); }

inline Eigen::VectorXd random_vector(std::mt19937& rng, int size, double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Eigen::VectorXd out(size);
  for (int i = 0; i < size; ++i)
    out[i] = dist(rng);
  return out;
}

inline Eigen::MatrixXd random_matrix(std::mt19937& rng, int rows, int cols, double lo,
                                     double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Eigen::MatrixXd out(rows, cols);
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r)
      out(r, c) = dist(rng);
  return out;
}

// Random per-triangle vectors projected onto their triangle planes.
inline Eigen::MatrixX3d random_tangent_field(const mfg::TriMesh& mesh, std::mt19937& rng,
                                             double scale) {
  std::uniform_real_distribution<double> dist(-scale, scale);
  Eigen::MatrixX3d out(mesh.triangle_count(), 3);
  for (int j = 0; j < mesh.triangle_count(); ++j) {
    Eigen::Vector3d v(dist(rng), dist(rng), dist(rng));
    const Eigen::Vector3d normal = mesh.triangle_normal(j);
    out.row(j) = v - normal.dot(v) * normal;
  }
  return out;
}

inline mfg::FluxField random_flux(const mfg::TriMesh& mesh, std::mt19937& rng, int steps,
                                  double scale) {
  mfg::FluxField flux;
  flux.values.reserve(steps);
  for (int k = 0; k < steps; ++k)
    flux.values.push_back(random_tangent_field(mesh, rng, scale));
  return flux;
}

// Density with entries in [lo, hi]; not mass-normalized.
inline mfg::DensityField random_density(const mfg::TriMesh& mesh, std::mt19937& rng,
                                        int steps, double lo, double hi) {
  mfg::DensityField density;
  density.initial = random_vector(rng, mesh.vertex_count(), lo, hi);
  density.values = random_matrix(rng, mesh.vertex_count(), steps, lo, hi);
  return density;
}

// Unit-mass nonnegative density slice.
inline Eigen::VectorXd random_probability(const mfg::TriMesh& mesh, std::mt19937& rng) {
  Eigen::VectorXd p = random_vector(rng, mesh.vertex_count(), 0.1, 1.0);
  return p / mesh.vertex_areas().dot(p);
}

} // namespace testutil
