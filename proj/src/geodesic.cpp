#include <cmath>
#include <limits>
#include <queue>
#include <vector>

#include "mfg/errors.hpp"
#include "mfg/mesh.hpp"

namespace mfg {

Eigen::VectorXd geodesic_distances(const TriMesh& mesh, int source) {
  const int h = mesh.vertex_count();
  if (source < 0 || source >= h)
    fail(ErrorKind::validation, "geodesic_distances: source vertex out of range");

  Eigen::VectorXd dist =
      Eigen::VectorXd::Constant(h, std::numeric_limits<double>::infinity());
  dist[source] = 0.0;

  using Entry = std::pair<double, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> queue;
  queue.emplace(0.0, source);
  std::vector<char> settled(h, 0);

  while (!queue.empty()) {
    const auto [d, u] = queue.top();
    queue.pop();
    if (settled[u])
      continue;
    settled[u] = 1;
    for (const auto& [v, w] : mesh.adjacency()[u]) {
      const double candidate = d + w;
      if (candidate < dist[v]) {
        dist[v] = candidate;
        queue.emplace(candidate, v);
      }
    }
  }
  return dist;
}

Eigen::VectorXd sphere_distances(const TriMesh& mesh, int source) {
  const int h = mesh.vertex_count();
  if (source < 0 || source >= h)
    fail(ErrorKind::validation, "sphere_distances: source vertex out of range");
  const auto [radius, spread] = radius_spread(mesh);
  if (!(radius > 0.0) || spread > 1e-6)
    fail(ErrorKind::validation,
         "sphere_distances: vertices do not lie on a common sphere around the origin");

  const Eigen::Vector3d u = mesh.vertices().row(source).normalized();
  Eigen::VectorXd dist(h);
  for (int i = 0; i < h; ++i) {
    const double c = u.dot(mesh.vertices().row(i).normalized());
    dist[i] = radius * std::acos(std::clamp(c, -1.0, 1.0));
  }
  return dist;
}

} // namespace mfg
