#include "mfg/mesh.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <utility>

#include "mfg/errors.hpp"

namespace mfg {

namespace {

// Relative threshold deciding that a triangle is degenerate: twice the area
// against the squared longest edge.
constexpr double kDegenerateRatio = 1e-12;

} // namespace

TriMesh TriMesh::from_data(Eigen::MatrixX3d vertices, Eigen::MatrixX3i triangles) {
  const int h = static_cast<int>(vertices.rows());
  const int s = static_cast<int>(triangles.rows());
  if (h < 3 || s < 1)
    fail(ErrorKind::validation, "mesh needs at least 3 vertices and 1 triangle");
  if (!vertices.allFinite())
    fail(ErrorKind::validation, "mesh has non-finite vertex coordinates");

  TriMesh mesh;
  mesh.vertices_ = std::move(vertices);
  mesh.triangles_ = std::move(triangles);
  mesh.triangle_area_.resize(s);
  mesh.vertex_area_ = Eigen::VectorXd::Zero(h);
  mesh.grad_blocks_.resize(s);
  mesh.normals_.resize(s, 3);

  // Difference matrix sending the three vertex values to the two edge
  // increments of the local parameterization.
  Eigen::Matrix<double, 2, 3> diff;
  diff << -1, 1, 0, -1, 0, 1;

  std::vector<Eigen::Triplet<double>> stiffness_entries;
  stiffness_entries.reserve(9 * s);

  for (int j = 0; j < s; ++j) {
    const auto tri = mesh.triangles_.row(j);
    for (int c = 0; c < 3; ++c) {
      if (tri[c] < 0 || tri[c] >= h)
        fail(ErrorKind::validation,
             "triangle " + std::to_string(j) + " references vertex " + std::to_string(tri[c]) +
                 " out of range [0, " + std::to_string(h) + ")");
    }

    const Eigen::Vector3d p0 = mesh.vertices_.row(tri[0]);
    const Eigen::Vector3d e1 = mesh.vertices_.row(tri[1]).transpose() - p0;
    const Eigen::Vector3d e2 = mesh.vertices_.row(tri[2]).transpose() - p0;
    const Eigen::Vector3d cross = e1.cross(e2);
    const double doubled_area = cross.norm();
    const double longest_sq =
        std::max({e1.squaredNorm(), e2.squaredNorm(), (e2 - e1).squaredNorm()});
    if (doubled_area <= kDegenerateRatio * longest_sq || doubled_area == 0.0)
      fail(ErrorKind::validation,
           "triangle " + std::to_string(j) + " (" + std::to_string(tri[0]) + ", " +
               std::to_string(tri[1]) + ", " + std::to_string(tri[2]) + ") is degenerate");

    const double area = 0.5 * doubled_area;
    mesh.triangle_area_[j] = area;
    mesh.normals_.row(j) = cross / doubled_area;
    for (int c = 0; c < 3; ++c)
      mesh.vertex_area_[tri[c]] += area / 3.0;

    // Induced metric of the embedding restricted to the triangle.
    Eigen::Matrix2d metric;
    metric << e1.dot(e1), e1.dot(e2), e2.dot(e1), e2.dot(e2);
    Eigen::Matrix<double, 3, 2> edges;
    edges.col(0) = e1;
    edges.col(1) = e2;
    mesh.grad_blocks_[j] = edges * metric.inverse() * diff;

    const Eigen::Matrix3d local = area * (mesh.grad_blocks_[j].transpose() * mesh.grad_blocks_[j]);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        stiffness_entries.emplace_back(tri[a], tri[b], local(a, b));
  }

  mesh.stiffness_.resize(h, h);
  mesh.stiffness_.setFromTriplets(stiffness_entries.begin(), stiffness_entries.end());

  // 1-skeleton adjacency and closedness (every edge in exactly two faces).
  std::map<std::pair<int, int>, int> edge_use;
  for (int j = 0; j < s; ++j) {
    const auto tri = mesh.triangles_.row(j);
    for (int c = 0; c < 3; ++c) {
      const int a = tri[c];
      const int b = tri[(c + 1) % 3];
      edge_use[{std::min(a, b), std::max(a, b)}]++;
    }
  }
  mesh.adjacency_.resize(h);
  mesh.closed_ = true;
  for (const auto& [edge, count] : edge_use) {
    if (count != 2)
      mesh.closed_ = false;
    const double len = (mesh.vertices_.row(edge.first) - mesh.vertices_.row(edge.second)).norm();
    mesh.adjacency_[edge.first].emplace_back(edge.second, len);
    mesh.adjacency_[edge.second].emplace_back(edge.first, len);
  }
  for (auto& neighbours : mesh.adjacency_)
    std::sort(neighbours.begin(), neighbours.end());

  return mesh;
}

Eigen::MatrixX3d TriMesh::gradient(const Eigen::Ref<const Eigen::VectorXd>& psi) const {
  if (psi.size() != vertex_count())
    fail(ErrorKind::validation, "gradient: scalar field has wrong length");
  const int s = triangle_count();
  Eigen::MatrixX3d out(s, 3);
  for (int j = 0; j < s; ++j) {
    const auto tri = triangles_.row(j);
    const Eigen::Vector3d local(psi[tri[0]], psi[tri[1]], psi[tri[2]]);
    out.row(j) = (grad_blocks_[j] * local).transpose();
  }
  return out;
}

Eigen::VectorXd TriMesh::divergence(const Eigen::Ref<const Eigen::MatrixX3d>& field) const {
  if (field.rows() != triangle_count())
    fail(ErrorKind::validation, "divergence: vector field has wrong length");
  Eigen::VectorXd accum = Eigen::VectorXd::Zero(vertex_count());
  for (int j = 0; j < triangle_count(); ++j) {
    const auto tri = triangles_.row(j);
    const Eigen::Vector3d weights =
        triangle_area_[j] * (grad_blocks_[j].transpose() * field.row(j).transpose());
    for (int c = 0; c < 3; ++c)
      accum[tri[c]] += weights[c];
  }
  return -accum.cwiseQuotient(vertex_area_);
}

TriMesh TriMesh::icosphere(int subdivisions, double radius) {
  if (subdivisions < 0)
    fail(ErrorKind::validation, "icosphere: subdivisions must be >= 0");
  if (!(radius > 0.0))
    fail(ErrorKind::validation, "icosphere: radius must be positive");

  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Eigen::Vector3d> verts = {
      {-1, phi, 0}, {1, phi, 0},   {-1, -phi, 0}, {1, -phi, 0},
      {0, -1, phi}, {0, 1, phi},   {0, -1, -phi}, {0, 1, -phi},
      {phi, 0, -1}, {phi, 0, 1},   {-phi, 0, -1}, {-phi, 0, 1}};
  for (auto& v : verts)
    v = radius * v.normalized();

  std::vector<std::array<int, 3>> faces = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
      {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
      {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
      {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};

  for (int level = 0; level < subdivisions; ++level) {
    std::map<std::pair<int, int>, int> midpoint;
    auto split = [&](int a, int b) {
      const auto key = std::make_pair(std::min(a, b), std::max(a, b));
      auto it = midpoint.find(key);
      if (it != midpoint.end())
        return it->second;
      const Eigen::Vector3d mid = radius * (verts[a] + verts[b]).normalized();
      verts.push_back(mid);
      const int idx = static_cast<int>(verts.size()) - 1;
      midpoint.emplace(key, idx);
      return idx;
    };
    std::vector<std::array<int, 3>> refined;
    refined.reserve(4 * faces.size());
    for (const auto& f : faces) {
      const int ab = split(f[0], f[1]);
      const int bc = split(f[1], f[2]);
      const int ca = split(f[2], f[0]);
      refined.push_back({f[0], ab, ca});
      refined.push_back({f[1], bc, ab});
      refined.push_back({f[2], ca, bc});
      refined.push_back({ab, bc, ca});
    }
    faces = std::move(refined);
  }

  Eigen::MatrixX3d V(verts.size(), 3);
  for (size_t i = 0; i < verts.size(); ++i)
    V.row(i) = verts[i];
  Eigen::MatrixX3i F(faces.size(), 3);
  for (size_t j = 0; j < faces.size(); ++j)
    F.row(j) = Eigen::Vector3i(faces[j][0], faces[j][1], faces[j][2]);
  return from_data(std::move(V), std::move(F));
}

TriMesh TriMesh::flat_grid(int nx, int ny, double width, double height,
                           const std::function<bool(double, double)>& punctured) {
  if (nx < 1 || ny < 1)
    fail(ErrorKind::validation, "flat_grid: nx and ny must be >= 1");
  if (!(width > 0.0) || !(height > 0.0))
    fail(ErrorKind::validation, "flat_grid: width and height must be positive");

  const int cols = nx + 1;
  Eigen::MatrixX3d V((nx + 1) * (ny + 1), 3);
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      V.row(j * cols + i) = Eigen::Vector3d(width * i / nx, height * j / ny, 0.0);

  auto masked = [&](int idx) {
    return punctured && punctured(V(idx, 0), V(idx, 1));
  };

  std::vector<Eigen::Vector3i> faces;
  faces.reserve(2 * nx * ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int v00 = j * cols + i;
      const int v10 = v00 + 1;
      const int v01 = v00 + cols;
      const int v11 = v01 + 1;
      // Criss-cross diagonals: alternating the split keeps the grid mirror
      // symmetric and every corner vertex inside two faces.
      if ((i + j) % 2 == 0) {
        if (!(masked(v00) && masked(v10) && masked(v11)))
          faces.emplace_back(v00, v10, v11);
        if (!(masked(v00) && masked(v11) && masked(v01)))
          faces.emplace_back(v00, v11, v01);
      } else {
        if (!(masked(v00) && masked(v10) && masked(v01)))
          faces.emplace_back(v00, v10, v01);
        if (!(masked(v10) && masked(v11) && masked(v01)))
          faces.emplace_back(v10, v11, v01);
      }
    }
  }
  if (faces.empty())
    fail(ErrorKind::validation, "flat_grid: puncture mask removed every face");

  // Drop vertices no face references and reindex.
  std::vector<int> remap(V.rows(), -1);
  int kept = 0;
  for (const auto& f : faces)
    for (int c = 0; c < 3; ++c)
      if (remap[f[c]] < 0)
        remap[f[c]] = kept++;
  Eigen::MatrixX3d Vk(kept, 3);
  for (int i = 0; i < V.rows(); ++i)
    if (remap[i] >= 0)
      Vk.row(remap[i]) = V.row(i);
  Eigen::MatrixX3i F(faces.size(), 3);
  for (size_t j = 0; j < faces.size(); ++j)
    F.row(j) = Eigen::Vector3i(remap[faces[j][0]], remap[faces[j][1]], remap[faces[j][2]]);
  return from_data(std::move(Vk), std::move(F));
}

std::pair<double, double> radius_spread(const TriMesh& mesh) {
  const Eigen::VectorXd radii = mesh.vertices().rowwise().norm();
  const double mean = radii.mean();
  if (mean <= 0.0)
    return {mean, std::numeric_limits<double>::infinity()};
  const double spread =
      std::max(radii.maxCoeff() - mean, mean - radii.minCoeff()) / mean;
  return {mean, spread};
}

} // namespace mfg
