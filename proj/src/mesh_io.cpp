#include <cctype>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "mfg/errors.hpp"
#include "mfg/mesh.hpp"

namespace mfg {

namespace {

[[noreturn]] void parse_fail(const std::string& name, int line, const std::string& msg) {
  fail(ErrorKind::io, name + ":" + std::to_string(line) + ": " + msg);
}

// Reads the next line that carries content, stripping comments.
bool next_content_line(std::istream& in, std::string& line, int& line_no,
                       char comment = '#') {
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find(comment);
    if (hash != std::string::npos)
      line.erase(hash);
    bool blank = true;
    for (char ch : line)
      if (!std::isspace(static_cast<unsigned char>(ch))) {
        blank = false;
        break;
      }
    if (!blank)
      return true;
  }
  return false;
}

std::string lowercase_extension(const std::string& path) {
  const auto dot = path.rfind('.');
  if (dot == std::string::npos)
    return "";
  std::string ext = path.substr(dot + 1);
  for (char& ch : ext)
    ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return ext;
}

} // namespace

TriMesh TriMesh::load(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    fail(ErrorKind::io, "cannot open mesh file: " + path);
  const std::string ext = lowercase_extension(path);
  if (ext == "off")
    return load_off(in, path);
  if (ext == "obj")
    return load_obj(in, path);
  fail(ErrorKind::io, "unsupported mesh format (want .off or .obj): " + path);
}

TriMesh TriMesh::load_off(std::istream& in, const std::string& name) {
  std::string line;
  int line_no = 0;
  if (!next_content_line(in, line, line_no))
    parse_fail(name, line_no, "empty OFF file");

  // Header may be "OFF" alone or with the counts on the same line.
  std::istringstream header(line);
  std::string first;
  header >> first;
  long h = -1, s = -1, e = 0;
  if (first == "OFF") {
    if (!(header >> h >> s >> e)) {
      if (!next_content_line(in, line, line_no))
        parse_fail(name, line_no, "missing OFF counts line");
      std::istringstream counts(line);
      if (!(counts >> h >> s))
        parse_fail(name, line_no, "cannot parse vertex/face counts");
      counts >> e;
    }
  } else {
    std::istringstream counts(line);
    if (!(counts >> h >> s))
      parse_fail(name, line_no, "cannot parse vertex/face counts");
    counts >> e;
  }
  if (h < 3 || s < 1)
    parse_fail(name, line_no, "OFF mesh needs at least 3 vertices and 1 face");

  Eigen::MatrixX3d V(h, 3);
  for (long i = 0; i < h; ++i) {
    if (!next_content_line(in, line, line_no))
      parse_fail(name, line_no, "unexpected end of file in vertex list");
    std::istringstream row(line);
    double x, y, z;
    if (!(row >> x >> y >> z))
      parse_fail(name, line_no, "cannot parse vertex coordinates");
    V.row(i) = Eigen::Vector3d(x, y, z);
  }

  Eigen::MatrixX3i F(s, 3);
  for (long j = 0; j < s; ++j) {
    if (!next_content_line(in, line, line_no))
      parse_fail(name, line_no, "unexpected end of file in face list");
    std::istringstream row(line);
    long count;
    if (!(row >> count))
      parse_fail(name, line_no, "cannot parse face record");
    if (count != 3)
      parse_fail(name, line_no,
                 "face " + std::to_string(j) + " has " + std::to_string(count) +
                     " vertices; only triangles are supported");
    long a, b, c;
    if (!(row >> a >> b >> c))
      parse_fail(name, line_no, "cannot parse face indices");
    if (a < 0 || a >= h || b < 0 || b >= h || c < 0 || c >= h)
      parse_fail(name, line_no, "face " + std::to_string(j) + " index out of range");
    F.row(j) = Eigen::Vector3i(static_cast<int>(a), static_cast<int>(b), static_cast<int>(c));
  }

  return from_data(std::move(V), std::move(F));
}

TriMesh TriMesh::load_obj(std::istream& in, const std::string& name) {
  std::vector<Eigen::Vector3d> verts;
  std::vector<Eigen::Vector3i> faces;
  std::string line;
  int line_no = 0;

  auto resolve = [&](long idx, int ln) {
    const long n = static_cast<long>(verts.size());
    long v = idx > 0 ? idx - 1 : n + idx; // OBJ indices are 1-based; negatives relative
    if (v < 0 || v >= n)
      parse_fail(name, ln, "face index " + std::to_string(idx) + " out of range");
    return static_cast<int>(v);
  };

  while (next_content_line(in, line, line_no)) {
    std::istringstream row(line);
    std::string tag;
    row >> tag;
    if (tag == "v") {
      double x, y, z;
      if (!(row >> x >> y >> z))
        parse_fail(name, line_no, "cannot parse vertex record");
      verts.emplace_back(x, y, z);
    } else if (tag == "f") {
      std::vector<int> corner;
      std::string token;
      while (row >> token) {
        // Keep only the vertex index of "v", "v/t", "v//n" or "v/t/n".
        const auto slash = token.find('/');
        const std::string head = slash == std::string::npos ? token : token.substr(0, slash);
        try {
          corner.push_back(resolve(std::stol(head), line_no));
        } catch (const std::invalid_argument&) {
          parse_fail(name, line_no, "cannot parse face index '" + token + "'");
        } catch (const std::out_of_range&) {
          parse_fail(name, line_no, "face index '" + token + "' out of range");
        }
      }
      if (corner.size() != 3)
        parse_fail(name, line_no,
                   "face has " + std::to_string(corner.size()) +
                       " vertices; only triangles are supported");
      faces.emplace_back(corner[0], corner[1], corner[2]);
    }
    // Every other record type (vn, vt, usemtl, o, g, s, ...) is ignored.
  }

  if (verts.size() < 3 || faces.empty())
    fail(ErrorKind::io, name + ": OBJ mesh needs at least 3 vertices and 1 face");

  Eigen::MatrixX3d V(verts.size(), 3);
  for (size_t i = 0; i < verts.size(); ++i)
    V.row(i) = verts[i];
  Eigen::MatrixX3i F(faces.size(), 3);
  for (size_t j = 0; j < faces.size(); ++j)
    F.row(j) = faces[j];
  return from_data(std::move(V), std::move(F));
}

} // namespace mfg
