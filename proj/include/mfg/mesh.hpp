#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <functional>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace mfg {

/// Triangle mesh together with the discrete geometry the solver needs:
/// triangle areas, barycentric dual (vertex) areas, and per-triangle gradient
/// coefficient blocks. Piecewise-linear scalars live on vertices,
/// piecewise-constant vector fields live on triangles. Instances are
/// immutable after construction and safe to share across threads.
class TriMesh {
public:
  /// Empty mesh; assign from one of the factories before use.
  TriMesh() = default;

  /// Builds a mesh and all derived quantities. Throws ErrorKind::validation
  /// for out-of-range indices or degenerate (zero-area) triangles.
  static TriMesh from_data(Eigen::MatrixX3d vertices, Eigen::MatrixX3i triangles);

  /// Reads an ASCII OFF or OBJ file, dispatching on the file extension.
  static TriMesh load(const std::string& path);
  static TriMesh load_off(std::istream& in, const std::string& name);
  static TriMesh load_obj(std::istream& in, const std::string& name);

  /// Subdivided icosahedron scaled to the given radius. subdivisions = 0
  /// gives the icosahedron itself (12 vertices, 20 faces).
  static TriMesh icosphere(int subdivisions, double radius);

  /// Rectangle [0,width] x [0,height] at z = 0, each of the nx*ny cells split
  /// into two triangles. If `punctured` is set, faces whose three vertices
  /// all satisfy the predicate are removed (and orphaned vertices dropped).
  static TriMesh flat_grid(int nx, int ny, double width, double height,
                           const std::function<bool(double, double)>& punctured = nullptr);

  int vertex_count() const { return static_cast<int>(vertices_.rows()); }
  int triangle_count() const { return static_cast<int>(triangles_.rows()); }

  const Eigen::MatrixX3d& vertices() const { return vertices_; }
  const Eigen::MatrixX3i& triangles() const { return triangles_; }
  const Eigen::VectorXd& triangle_areas() const { return triangle_area_; }
  const Eigen::VectorXd& vertex_areas() const { return vertex_area_; }
  double total_area() const { return triangle_area_.sum(); }

  /// 3x3 coefficient block of triangle j: row d holds the weights that the
  /// three vertex values contribute to component d of the triangle gradient.
  const Eigen::Matrix3d& gradient_block(int j) const { return grad_blocks_[j]; }

  /// Unit normal of triangle j (orientation as stored).
  Eigen::Vector3d triangle_normal(int j) const { return normals_.row(j); }

  /// Per-triangle gradient of a per-vertex scalar; each row lies in the
  /// plane of its triangle and constants map to zero.
  Eigen::MatrixX3d gradient(const Eigen::Ref<const Eigen::VectorXd>& psi) const;

  /// Adjoint of the negative gradient under the area-weighted inner
  /// products: <-grad psi, u>_T == <psi, divergence(u)>_V for all psi.
  Eigen::VectorXd divergence(const Eigen::Ref<const Eigen::MatrixX3d>& field) const;

  /// Stiffness matrix sum_d G_d^T A_T G_d (symmetric positive semidefinite,
  /// constants in its kernel).
  const Eigen::SparseMatrix<double>& stiffness() const { return stiffness_; }

  /// Vertex adjacency of the 1-skeleton: for each vertex, the neighbours it
  /// shares a triangle with and the Euclidean edge lengths.
  const std::vector<std::vector<std::pair<int, double>>>& adjacency() const {
    return adjacency_;
  }

  /// True when every edge is shared by exactly two triangles.
  bool is_closed() const { return closed_; }

private:
  Eigen::MatrixX3d vertices_;
  Eigen::MatrixX3i triangles_;
  Eigen::VectorXd triangle_area_;
  Eigen::VectorXd vertex_area_;
  std::vector<Eigen::Matrix3d> grad_blocks_;
  Eigen::MatrixX3d normals_;
  Eigen::SparseMatrix<double> stiffness_;
  std::vector<std::vector<std::pair<int, double>>> adjacency_;
  bool closed_ = false;
};

/// Shortest-path distances from `source` over the vertex graph (edges join
/// vertices sharing a triangle, weighted by Euclidean length). Unreachable
/// vertices get +infinity.
Eigen::VectorXd geodesic_distances(const TriMesh& mesh, int source);

/// Great-circle distances from `source`, for meshes whose vertices lie on a
/// common sphere around the origin: r * arccos(u_i . u_source).
Eigen::VectorXd sphere_distances(const TriMesh& mesh, int source);

/// Mean distance of the vertices from the origin, and the largest relative
/// deviation from it (used to decide whether sphere_distances applies).
std::pair<double, double> radius_spread(const TriMesh& mesh);

} // namespace mfg
