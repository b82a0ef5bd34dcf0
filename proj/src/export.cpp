#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "mfg/errors.hpp"
#include "mfg/runner.hpp"

namespace mfg {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out)
    fail(ErrorKind::io, "cannot write file: " + path);
  out << std::setprecision(17);
  return out;
}

std::string step_name(const std::string& stem, int step, const char* ext) {
  std::ostringstream name;
  name << stem << "_" << std::setw(3) << std::setfill('0') << step << ext;
  return name.str();
}

void write_csv(const TriMesh& mesh, const Eigen::VectorXd& slice, const std::string& path) {
  auto out = open_out(path);
  out << "vertex_index,x,y,z,density\n";
  for (int i = 0; i < mesh.vertex_count(); ++i)
    out << i << "," << mesh.vertices()(i, 0) << "," << mesh.vertices()(i, 1) << ","
        << mesh.vertices()(i, 2) << "," << slice[i] << "\n";
  if (!out)
    fail(ErrorKind::io, "write failed: " + path);
}

} // namespace

void write_vtk(const TriMesh& mesh, const Eigen::VectorXd& scalar,
               const std::string& scalar_name, const std::string& path) {
  auto out = open_out(path);
  out << "# vtk DataFile Version 3.0\n"
      << "meshmfg snapshot\n"
      << "ASCII\n"
      << "DATASET POLYDATA\n"
      << "POINTS " << mesh.vertex_count() << " double\n";
  for (int i = 0; i < mesh.vertex_count(); ++i)
    out << mesh.vertices()(i, 0) << " " << mesh.vertices()(i, 1) << " "
        << mesh.vertices()(i, 2) << "\n";
  out << "POLYGONS " << mesh.triangle_count() << " " << 4 * mesh.triangle_count() << "\n";
  for (int j = 0; j < mesh.triangle_count(); ++j)
    out << "3 " << mesh.triangles()(j, 0) << " " << mesh.triangles()(j, 1) << " "
        << mesh.triangles()(j, 2) << "\n";
  out << "POINT_DATA " << mesh.vertex_count() << "\n"
      << "SCALARS " << scalar_name << " double 1\n"
      << "LOOKUP_TABLE default\n";
  for (int i = 0; i < mesh.vertex_count(); ++i)
    out << scalar[i] << "\n";
  if (!out)
    fail(ErrorKind::io, "write failed: " + path);
}

void export_snapshots_csv(const TriMesh& mesh, const Eigen::VectorXd& initial,
                          const Eigen::MatrixXd& density, const std::string& directory) {
  namespace fs = std::filesystem;
  fs::create_directories(directory);
  write_csv(mesh, initial, (fs::path(directory) / step_name("density", 0, ".csv")).string());
  for (int k = 0; k < density.cols(); ++k)
    write_csv(mesh, density.col(k),
              (fs::path(directory) / step_name("density", k + 1, ".csv")).string());
}

void export_snapshots_vtk(const TriMesh& mesh, const Eigen::VectorXd& initial,
                          const Eigen::MatrixXd& density, const std::string& directory) {
  namespace fs = std::filesystem;
  fs::create_directories(directory);
  write_vtk(mesh, initial, "density",
            (fs::path(directory) / step_name("density", 0, ".vtk")).string());
  for (int k = 0; k < density.cols(); ++k)
    write_vtk(mesh, density.col(k), "density",
              (fs::path(directory) / step_name("density", k + 1, ".vtk")).string());
}

} // namespace mfg
