#include "mfg/scenario.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "mfg/errors.hpp"

namespace mfg {

namespace {

using Json = nlohmann::ordered_json;

[[noreturn]] void bad(const std::string& where, const std::string& msg) {
  fail(ErrorKind::validation, where + ": " + msg);
}

const Json& expect_object(const Json& j, const std::string& where) {
  if (!j.is_object())
    bad(where, "expected an object");
  return j;
}

void check_keys(const Json& j, std::initializer_list<const char*> allowed,
                const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (std::find_if(allowed.begin(), allowed.end(),
                     [&](const char* k) { return key == k; }) == allowed.end())
      bad(where, "unknown key '" + key + "'");
  }
}

double get_number(const Json& j, const char* key, const std::string& where) {
  if (!j.contains(key))
    bad(where, std::string("missing key '") + key + "'");
  if (!j[key].is_number())
    bad(where, std::string("'") + key + "' must be a number");
  return j[key].get<double>();
}

double get_number_or(const Json& j, const char* key, double fallback,
                     const std::string& where) {
  return j.contains(key) ? get_number(j, key, where) : fallback;
}

int get_int(const Json& j, const char* key, const std::string& where) {
  if (!j.contains(key))
    bad(where, std::string("missing key '") + key + "'");
  if (!j[key].is_number_integer())
    bad(where, std::string("'") + key + "' must be an integer");
  return j[key].get<int>();
}

int get_int_or(const Json& j, const char* key, int fallback, const std::string& where) {
  return j.contains(key) ? get_int(j, key, where) : fallback;
}

bool get_bool_or(const Json& j, const char* key, bool fallback, const std::string& where) {
  if (!j.contains(key))
    return fallback;
  if (!j[key].is_boolean())
    bad(where, std::string("'") + key + "' must be a boolean");
  return j[key].get<bool>();
}

std::string get_string(const Json& j, const char* key, const std::string& where) {
  if (!j.contains(key))
    bad(where, std::string("missing key '") + key + "'");
  if (!j[key].is_string())
    bad(where, std::string("'") + key + "' must be a string");
  return j[key].get<std::string>();
}

std::string get_string_or(const Json& j, const char* key, const std::string& fallback,
                          const std::string& where) {
  return j.contains(key) ? get_string(j, key, where) : fallback;
}

Eigen::Vector3d get_vec3(const Json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || !j[key].is_array() || j[key].size() != 3)
    bad(where, std::string("'") + key + "' must be an array of 3 numbers");
  Eigen::Vector3d out;
  for (int c = 0; c < 3; ++c) {
    if (!j[key][c].is_number())
      bad(where, std::string("'") + key + "' must contain numbers");
    out[c] = j[key][c].get<double>();
  }
  return out;
}

// ---------------------------------------------------------------- enums

template <typename T>
T parse_enum(const Json& j, const char* key, const std::string& where,
             const std::vector<std::pair<std::string, T>>& table, T fallback,
             bool required = false) {
  if (!j.contains(key)) {
    if (required)
      bad(where, std::string("missing key '") + key + "'");
    return fallback;
  }
  if (!j[key].is_string())
    bad(where, std::string("'") + key + "' must be a string");
  const std::string value = j[key].get<std::string>();
  for (const auto& [name, v] : table)
    if (name == value)
      return v;
  std::string options;
  for (const auto& [name, v] : table) {
    (void)v;
    options += options.empty() ? name : ", " + name;
  }
  bad(where, std::string("'") + key + "' must be one of {" + options + "}, got '" + value + "'");
}

const std::vector<std::pair<std::string, AveragingMode>> kAveraging = {
    {"arithmetic", AveragingMode::arithmetic},
    {"geometric", AveragingMode::geometric},
    {"harmonic", AveragingMode::harmonic}};

const std::vector<std::pair<std::string, GeodesicMode>> kGeodesic = {
    {"graph", GeodesicMode::graph}, {"sphere", GeodesicMode::sphere}};

const std::vector<std::pair<std::string, InteractionKind>> kInteraction = {
    {"vanilla", InteractionKind::vanilla},     {"obstacle", InteractionKind::obstacle},
    {"entropy", InteractionKind::entropy},     {"congestion", InteractionKind::congestion},
    {"nonlocal", InteractionKind::nonlocal},   {"dirichlet", InteractionKind::dirichlet}};

const std::vector<std::pair<std::string, TerminalKind>> kTerminal = {
    {"quadratic", TerminalKind::quadratic},
    {"kl", TerminalKind::kl},
    {"obstacle_region", TerminalKind::obstacle_region}};

const std::vector<std::pair<std::string, MaskSpec::Kind>> kMask = {
    {"box", MaskSpec::Kind::box},
    {"longitude_band", MaskSpec::Kind::longitude_band},
    {"vertices", MaskSpec::Kind::vertices}};

const std::vector<std::pair<std::string, MeshSpec::Kind>> kMesh = {
    {"file", MeshSpec::Kind::file},
    {"icosphere", MeshSpec::Kind::icosphere},
    {"grid", MeshSpec::Kind::grid}};

const std::vector<std::pair<std::string, KernelSpec::Kind>> kKernel = {
    {"gaussian", KernelSpec::Kind::gaussian}, {"laplacian", KernelSpec::Kind::laplacian}};

template <typename T>
std::string enum_name(const std::vector<std::pair<std::string, T>>& table, T value) {
  for (const auto& [name, v] : table)
    if (v == value)
      return name;
  return "?";
}

// ---------------------------------------------------------------- parsing

std::vector<MaskSpec> parse_masks(const Json& j, const std::string& where) {
  if (!j.is_array())
    bad(where, "expected an array of masks");
  std::vector<MaskSpec> out;
  int index = 0;
  for (const auto& m : j) {
    const std::string sub = where + "[" + std::to_string(index++) + "]";
    expect_object(m, sub);
    MaskSpec mask;
    mask.kind = parse_enum(m, "kind", sub, kMask, MaskSpec::Kind::box, true);
    switch (mask.kind) {
    case MaskSpec::Kind::box:
      check_keys(m, {"kind", "min", "max"}, sub);
      mask.lo = get_vec3(m, "min", sub);
      mask.hi = get_vec3(m, "max", sub);
      break;
    case MaskSpec::Kind::longitude_band:
      check_keys(m, {"kind", "min_deg", "max_deg"}, sub);
      mask.lon_min_deg = get_number(m, "min_deg", sub);
      mask.lon_max_deg = get_number(m, "max_deg", sub);
      break;
    case MaskSpec::Kind::vertices: {
      check_keys(m, {"kind", "indices"}, sub);
      if (!m.contains("indices") || !m["indices"].is_array())
        bad(sub, "'indices' must be an array of vertex indices");
      for (const auto& v : m["indices"]) {
        if (!v.is_number_integer())
          bad(sub, "'indices' must contain integers");
        mask.indices.push_back(v.get<int>());
      }
      break;
    }
    }
    out.push_back(std::move(mask));
  }
  return out;
}

MeshSpec parse_mesh(const Json& j, const std::string& where) {
  expect_object(j, where);
  MeshSpec mesh;
  mesh.kind = parse_enum(j, "kind", where, kMesh, MeshSpec::Kind::icosphere, true);
  switch (mesh.kind) {
  case MeshSpec::Kind::file:
    check_keys(j, {"kind", "path"}, where);
    mesh.path = get_string(j, "path", where);
    break;
  case MeshSpec::Kind::icosphere:
    check_keys(j, {"kind", "subdivisions", "radius"}, where);
    mesh.subdivisions = get_int_or(j, "subdivisions", 2, where);
    mesh.radius = get_number_or(j, "radius", 1.0, where);
    break;
  case MeshSpec::Kind::grid:
    check_keys(j, {"kind", "nx", "ny", "width", "height", "puncture"}, where);
    mesh.nx = get_int_or(j, "nx", 10, where);
    mesh.ny = get_int_or(j, "ny", 10, where);
    mesh.width = get_number_or(j, "width", 1.0, where);
    mesh.height = get_number_or(j, "height", 1.0, where);
    if (j.contains("puncture"))
      mesh.puncture = parse_masks(j["puncture"], where + ".puncture");
    break;
  }
  return mesh;
}

DensitySpec parse_density(const Json& j, const std::string& where) {
  expect_object(j, where);
  check_keys(j, {"bumps", "file", "uniform_floor"}, where);
  DensitySpec density;
  density.uniform_floor = get_number_or(j, "uniform_floor", 1e-8, where);
  density.file = get_string_or(j, "file", "", where);
  if (j.contains("bumps")) {
    if (!j["bumps"].is_array())
      bad(where, "'bumps' must be an array");
    int index = 0;
    for (const auto& b : j["bumps"]) {
      const std::string sub = where + ".bumps[" + std::to_string(index++) + "]";
      expect_object(b, sub);
      check_keys(b, {"center_vertex", "center", "sigma", "weight"}, sub);
      BumpSpec bump;
      if (b.contains("center_vertex"))
        bump.center_vertex = get_int(b, "center_vertex", sub);
      if (b.contains("center"))
        bump.center = get_vec3(b, "center", sub);
      if (!bump.center_vertex && !bump.center)
        bad(sub, "a bump needs 'center_vertex' or 'center'");
      if (bump.center_vertex && bump.center)
        bad(sub, "give either 'center_vertex' or 'center', not both");
      bump.sigma = get_number_or(b, "sigma", 0.3, sub);
      bump.weight = get_number_or(b, "weight", 1.0, sub);
      if (!(bump.sigma > 0.0))
        bad(sub, "'sigma' must be positive");
      if (!(bump.weight > 0.0))
        bad(sub, "'weight' must be positive");
      density.bumps.push_back(bump);
    }
  }
  if (density.file.empty() && density.bumps.empty())
    bad(where, "a density needs 'bumps' or 'file'");
  if (!density.file.empty() && !density.bumps.empty())
    bad(where, "give either 'bumps' or 'file', not both");
  return density;
}

KernelSpec parse_kernel(const Json& j, const std::string& where) {
  expect_object(j, where);
  KernelSpec kernel;
  kernel.kind = parse_enum(j, "kind", where, kKernel, KernelSpec::Kind::gaussian, true);
  if (kernel.kind == KernelSpec::Kind::gaussian) {
    check_keys(j, {"kind", "mu", "sigma"}, where);
    kernel.mu = get_number_or(j, "mu", 1.0, where);
    kernel.sigma = get_number_or(j, "sigma", 0.1, where);
  } else {
    check_keys(j, {"kind"}, where);
  }
  return kernel;
}

InteractionSpec parse_interaction(const Json& j, const std::string& where) {
  expect_object(j, where);
  InteractionSpec spec;
  spec.kind = parse_enum(j, "kind", where, kInteraction, InteractionKind::vanilla, true);
  switch (spec.kind) {
  case InteractionKind::vanilla:
    check_keys(j, {"kind"}, where);
    break;
  case InteractionKind::obstacle:
    check_keys(j, {"kind", "weight", "region"}, where);
    spec.weight = get_number(j, "weight", where);
    if (!j.contains("region"))
      bad(where, "obstacle interaction needs a 'region'");
    spec.region = parse_masks(j["region"], where + ".region");
    break;
  case InteractionKind::entropy:
    check_keys(j, {"kind", "weight"}, where);
    spec.weight = get_number(j, "weight", where);
    break;
  case InteractionKind::congestion:
    check_keys(j, {"kind", "weight", "floor"}, where);
    spec.weight = get_number(j, "weight", where);
    spec.floor = get_number_or(j, "floor", 1e-4, where);
    break;
  case InteractionKind::nonlocal:
    check_keys(j, {"kind", "weight", "kernel"}, where);
    spec.weight = get_number(j, "weight", where);
    if (!j.contains("kernel"))
      bad(where, "nonlocal interaction needs a 'kernel'");
    spec.kernel = parse_kernel(j["kernel"], where + ".kernel");
    break;
  case InteractionKind::dirichlet:
    check_keys(j, {"kind", "weight"}, where);
    spec.weight = get_number(j, "weight", where);
    spec.kernel.kind = KernelSpec::Kind::laplacian;
    break;
  }
  return spec;
}

TerminalSpec parse_terminal(const Json& j, const std::string& where) {
  expect_object(j, where);
  TerminalSpec spec;
  spec.kind = parse_enum(j, "kind", where, kTerminal, TerminalKind::quadratic, true);
  if (spec.kind == TerminalKind::obstacle_region) {
    check_keys(j, {"kind", "weight", "region"}, where);
    if (!j.contains("region"))
      bad(where, "obstacle_region terminal needs a 'region'");
    spec.region = parse_masks(j["region"], where + ".region");
  } else {
    check_keys(j, {"kind", "weight"}, where);
  }
  spec.weight = get_number(j, "weight", where);
  return spec;
}

SolveOptions parse_solver(const Json& j, const std::string& where) {
  expect_object(j, where);
  check_keys(j,
             {"iterations", "eta", "line_search", "tolerance", "kkt_every", "log_every",
              "deterministic"},
             where);
  SolveOptions options;
  options.iterations = get_int_or(j, "iterations", 1000, where);
  options.step_size = get_number_or(j, "eta", 1.0, where);
  options.line_search = get_bool_or(j, "line_search", false, where);
  options.tolerance = get_number_or(j, "tolerance", 0.0, where);
  options.kkt_every = get_int_or(j, "kkt_every", 25, where);
  options.log_every = get_int_or(j, "log_every", 0, where);
  options.deterministic = get_bool_or(j, "deterministic", true, where);
  return options;
}

OutputSpec parse_output(const Json& j, const std::string& where) {
  expect_object(j, where);
  check_keys(j, {"directory", "format", "snapshots"}, where);
  OutputSpec output;
  output.directory = get_string_or(j, "directory", "runs/out", where);
  output.format = get_string_or(j, "format", "csv", where);
  output.snapshots = get_bool_or(j, "snapshots", true, where);
  if (output.format != "csv" && output.format != "vtk")
    bad(where, "'format' must be csv or vtk");
  return output;
}

Scenario parse_json(const Json& j, const std::string& name) {
  expect_object(j, name);
  check_keys(j,
             {"name", "mesh", "geodesic", "time_steps", "initial_density", "target_density",
              "cost", "variants", "report_interaction", "solver", "output"},
             name);

  Scenario sc;
  sc.name = get_string_or(j, "name", "scenario", name);
  if (!j.contains("mesh"))
    bad(name, "missing 'mesh'");
  sc.mesh = parse_mesh(j["mesh"], name + ".mesh");
  sc.geodesic = parse_enum(j, "geodesic", name, kGeodesic, GeodesicMode::graph);
  sc.time_steps = get_int_or(j, "time_steps", 8, name);
  if (!j.contains("initial_density"))
    bad(name, "missing 'initial_density'");
  sc.initial_density = parse_density(j["initial_density"], name + ".initial_density");
  if (j.contains("target_density"))
    sc.target_density = parse_density(j["target_density"], name + ".target_density");

  if (!j.contains("cost"))
    bad(name, "missing 'cost'");
  const Json& cost = expect_object(j["cost"], name + ".cost");
  check_keys(cost, {"averaging", "interaction", "terminal"}, name + ".cost");
  sc.averaging = parse_enum(cost, "averaging", name + ".cost", kAveraging,
                            AveragingMode::arithmetic);
  if (!cost.contains("interaction"))
    bad(name + ".cost", "missing 'interaction'");
  sc.interaction = parse_interaction(cost["interaction"], name + ".cost.interaction");
  if (!cost.contains("terminal"))
    bad(name + ".cost", "missing 'terminal'");
  sc.terminal = parse_terminal(cost["terminal"], name + ".cost.terminal");

  if (j.contains("variants")) {
    if (!j["variants"].is_array())
      bad(name, "'variants' must be an array");
    int index = 0;
    for (const auto& v : j["variants"]) {
      const std::string sub = name + ".variants[" + std::to_string(index++) + "]";
      expect_object(v, sub);
      check_keys(v, {"name", "interaction", "terminal"}, sub);
      VariantSpec variant;
      variant.name = get_string(v, "name", sub);
      if (v.contains("interaction"))
        variant.interaction = parse_interaction(v["interaction"], sub + ".interaction");
      if (v.contains("terminal"))
        variant.terminal = parse_terminal(v["terminal"], sub + ".terminal");
      sc.variants.push_back(std::move(variant));
    }
  }
  if (j.contains("report_interaction"))
    sc.report_interaction =
        parse_interaction(j["report_interaction"], name + ".report_interaction");

  if (j.contains("solver"))
    sc.solver = parse_solver(j["solver"], name + ".solver");
  if (j.contains("output"))
    sc.output = parse_output(j["output"], name + ".output");
  return sc;
}

// ---------------------------------------------------------------- dumping

Json masks_json(const std::vector<MaskSpec>& masks) {
  Json out = Json::array();
  for (const auto& m : masks) {
    Json j;
    j["kind"] = enum_name(kMask, m.kind);
    switch (m.kind) {
    case MaskSpec::Kind::box:
      j["min"] = {m.lo[0], m.lo[1], m.lo[2]};
      j["max"] = {m.hi[0], m.hi[1], m.hi[2]};
      break;
    case MaskSpec::Kind::longitude_band:
      j["min_deg"] = m.lon_min_deg;
      j["max_deg"] = m.lon_max_deg;
      break;
    case MaskSpec::Kind::vertices:
      j["indices"] = m.indices;
      break;
    }
    out.push_back(std::move(j));
  }
  return out;
}

Json density_json(const DensitySpec& density) {
  Json j;
  if (!density.file.empty()) {
    j["file"] = density.file;
  } else {
    Json bumps = Json::array();
    for (const auto& b : density.bumps) {
      Json bj;
      if (b.center_vertex)
        bj["center_vertex"] = *b.center_vertex;
      else
        bj["center"] = {(*b.center)[0], (*b.center)[1], (*b.center)[2]};
      bj["sigma"] = b.sigma;
      bj["weight"] = b.weight;
      bumps.push_back(std::move(bj));
    }
    j["bumps"] = std::move(bumps);
  }
  j["uniform_floor"] = density.uniform_floor;
  return j;
}

Json interaction_json(const InteractionSpec& spec) {
  Json j;
  j["kind"] = enum_name(kInteraction, spec.kind);
  switch (spec.kind) {
  case InteractionKind::vanilla:
    break;
  case InteractionKind::obstacle:
    j["weight"] = spec.weight;
    j["region"] = masks_json(spec.region);
    break;
  case InteractionKind::entropy:
    j["weight"] = spec.weight;
    break;
  case InteractionKind::congestion:
    j["weight"] = spec.weight;
    j["floor"] = spec.floor;
    break;
  case InteractionKind::nonlocal:
    j["weight"] = spec.weight;
    j["kernel"] = {{"kind", "gaussian"}, {"mu", spec.kernel.mu}, {"sigma", spec.kernel.sigma}};
    break;
  case InteractionKind::dirichlet:
    j["weight"] = spec.weight;
    break;
  }
  return j;
}

Json terminal_json(const TerminalSpec& spec) {
  Json j;
  j["kind"] = enum_name(kTerminal, spec.kind);
  j["weight"] = spec.weight;
  if (spec.kind == TerminalKind::obstacle_region)
    j["region"] = masks_json(spec.region);
  return j;
}

Json scenario_json(const Scenario& sc) {
  Json j;
  j["name"] = sc.name;

  Json mesh;
  mesh["kind"] = enum_name(kMesh, sc.mesh.kind);
  switch (sc.mesh.kind) {
  case MeshSpec::Kind::file:
    mesh["path"] = sc.mesh.path;
    break;
  case MeshSpec::Kind::icosphere:
    mesh["subdivisions"] = sc.mesh.subdivisions;
    mesh["radius"] = sc.mesh.radius;
    break;
  case MeshSpec::Kind::grid:
    mesh["nx"] = sc.mesh.nx;
    mesh["ny"] = sc.mesh.ny;
    mesh["width"] = sc.mesh.width;
    mesh["height"] = sc.mesh.height;
    if (!sc.mesh.puncture.empty())
      mesh["puncture"] = masks_json(sc.mesh.puncture);
    break;
  }
  j["mesh"] = std::move(mesh);

  j["geodesic"] = enum_name(kGeodesic, sc.geodesic);
  j["time_steps"] = sc.time_steps;
  j["initial_density"] = density_json(sc.initial_density);
  if (sc.target_density)
    j["target_density"] = density_json(*sc.target_density);

  Json cost;
  cost["averaging"] = enum_name(kAveraging, sc.averaging);
  cost["interaction"] = interaction_json(sc.interaction);
  cost["terminal"] = terminal_json(sc.terminal);
  j["cost"] = std::move(cost);

  if (!sc.variants.empty()) {
    Json variants = Json::array();
    for (const auto& v : sc.variants) {
      Json vj;
      vj["name"] = v.name;
      if (v.interaction)
        vj["interaction"] = interaction_json(*v.interaction);
      if (v.terminal)
        vj["terminal"] = terminal_json(*v.terminal);
      variants.push_back(std::move(vj));
    }
    j["variants"] = std::move(variants);
  }
  if (sc.report_interaction)
    j["report_interaction"] = interaction_json(*sc.report_interaction);

  j["solver"] = {{"iterations", sc.solver.iterations}, {"eta", sc.solver.step_size},
                 {"line_search", sc.solver.line_search}, {"tolerance", sc.solver.tolerance},
                 {"kkt_every", sc.solver.kkt_every},     {"log_every", sc.solver.log_every},
                 {"deterministic", sc.solver.deterministic}};
  j["output"] = {{"directory", sc.output.directory},
                 {"format", sc.output.format},
                 {"snapshots", sc.output.snapshots}};
  return j;
}

Eigen::VectorXd load_density_file(const TriMesh& mesh, const std::string& path) {
  std::ifstream in(path);
  if (!in)
    fail(ErrorKind::io, "cannot open density file: " + path);
  std::vector<double> values;
  double v;
  while (in >> v)
    values.push_back(v);
  if (static_cast<int>(values.size()) != mesh.vertex_count())
    fail(ErrorKind::validation, "density file " + path + " has " +
                                    std::to_string(values.size()) + " values, mesh has " +
                                    std::to_string(mesh.vertex_count()) + " vertices");
  Eigen::VectorXd out = Eigen::Map<Eigen::VectorXd>(values.data(), values.size());
  if ((out.array() < 0.0).any())
    fail(ErrorKind::validation, "density file " + path + " has negative entries");
  const double mass = slice_mass(mesh, out);
  if (!(mass > 0.0))
    fail(ErrorKind::validation, "density file " + path + " has zero mass");
  return out / mass;
}

} // namespace

Scenario Scenario::parse_text(const std::string& text, const std::string& name) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::validation, name + ": " + e.what());
  }
  return parse_json(j, name);
}

Scenario Scenario::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    fail(ErrorKind::io, "cannot open scenario file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_text(buffer.str(), path);
}

std::string Scenario::dump() const { return scenario_json(*this).dump(2) + "\n"; }

Eigen::VectorXd mask_indicator(const TriMesh& mesh, const std::vector<MaskSpec>& masks) {
  const int h = mesh.vertex_count();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(h);
  for (const auto& mask : masks) {
    switch (mask.kind) {
    case MaskSpec::Kind::box:
      for (int i = 0; i < h; ++i) {
        const Eigen::Vector3d p = mesh.vertices().row(i);
        if ((p.array() >= mask.lo.array()).all() && (p.array() <= mask.hi.array()).all())
          out[i] = 1.0;
      }
      break;
    case MaskSpec::Kind::longitude_band:
      for (int i = 0; i < h; ++i) {
        const double lon =
            std::atan2(mesh.vertices()(i, 1), mesh.vertices()(i, 0)) * 180.0 / M_PI;
        const bool inside = mask.lon_min_deg <= mask.lon_max_deg
                                ? lon >= mask.lon_min_deg && lon <= mask.lon_max_deg
                                : lon >= mask.lon_min_deg || lon <= mask.lon_max_deg;
        if (inside)
          out[i] = 1.0;
      }
      break;
    case MaskSpec::Kind::vertices:
      for (int idx : mask.indices) {
        if (idx < 0 || idx >= h)
          fail(ErrorKind::validation,
               "mask vertex index " + std::to_string(idx) + " out of range");
        out[idx] = 1.0;
      }
      break;
    }
  }
  return out;
}

Eigen::VectorXd synth_density(const TriMesh& mesh, const std::vector<BumpSpec>& bumps,
                              GeodesicMode mode, double uniform_floor) {
  if (bumps.empty())
    fail(ErrorKind::validation, "synth_density: need at least one bump");
  const int h = mesh.vertex_count();

  auto resolve_center = [&](const BumpSpec& bump) {
    if (bump.center_vertex) {
      if (*bump.center_vertex < 0 || *bump.center_vertex >= h)
        fail(ErrorKind::validation, "bump center vertex " +
                                        std::to_string(*bump.center_vertex) + " out of range");
      return *bump.center_vertex;
    }
    int best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (int i = 0; i < h; ++i) {
      const double d = (mesh.vertices().row(i).transpose() - *bump.center).squaredNorm();
      if (d < best_dist) {
        best_dist = d;
        best = i;
      }
    }
    return best;
  };

  Eigen::VectorXd raw = Eigen::VectorXd::Zero(h);
  for (const auto& bump : bumps) {
    const int center = resolve_center(bump);
    const Eigen::VectorXd dist = mode == GeodesicMode::sphere
                                     ? sphere_distances(mesh, center)
                                     : geodesic_distances(mesh, center);
    for (int i = 0; i < h; ++i) {
      const double d = dist[i];
      if (std::isfinite(d))
        raw[i] += bump.weight * std::exp(-d * d / (bump.sigma * bump.sigma));
    }
  }

  double mass = slice_mass(mesh, raw);
  if (!(mass > 0.0))
    fail(ErrorKind::validation, "synth_density: bumps underflow everywhere");
  raw /= mass;

  if (uniform_floor > 0.0) {
    raw.array() += uniform_floor / mesh.total_area();
    raw /= slice_mass(mesh, raw);
  }
  return raw;
}

ValidatedScenario validate_scenario(const Scenario& scenario) {
  if (scenario.time_steps < 1)
    fail(ErrorKind::validation, "time_steps must be >= 1");
  if (scenario.solver.iterations < 1)
    fail(ErrorKind::validation, "solver.iterations must be >= 1");
  if (!(scenario.solver.step_size > 0.0))
    fail(ErrorKind::validation, "solver.eta must be positive");
  if (scenario.solver.tolerance < 0.0)
    fail(ErrorKind::validation, "solver.tolerance must be nonnegative");
  if (scenario.solver.kkt_every < 1)
    fail(ErrorKind::validation, "solver.kkt_every must be >= 1");

  ValidatedScenario out;
  out.scenario_name = scenario.name;
  out.time_steps = scenario.time_steps;
  out.solver = scenario.solver;
  out.output = scenario.output;
  out.normalized = scenario.dump();

  switch (scenario.mesh.kind) {
  case MeshSpec::Kind::file:
    out.mesh = TriMesh::load(scenario.mesh.path);
    break;
  case MeshSpec::Kind::icosphere:
    out.mesh = TriMesh::icosphere(scenario.mesh.subdivisions, scenario.mesh.radius);
    break;
  case MeshSpec::Kind::grid: {
    std::function<bool(double, double)> punctured;
    if (!scenario.mesh.puncture.empty()) {
      const auto masks = scenario.mesh.puncture;
      punctured = [masks](double x, double y) {
        for (const auto& mask : masks) {
          if (mask.kind != MaskSpec::Kind::box)
            fail(ErrorKind::validation, "grid puncture masks must be boxes");
          if (x >= mask.lo[0] && x <= mask.hi[0] && y >= mask.lo[1] && y <= mask.hi[1])
            return true;
        }
        return false;
      };
    }
    out.mesh = TriMesh::flat_grid(scenario.mesh.nx, scenario.mesh.ny, scenario.mesh.width,
                                  scenario.mesh.height, punctured);
    break;
  }
  }

  if (scenario.geodesic == GeodesicMode::sphere) {
    const auto [radius, spread] = radius_spread(out.mesh);
    if (!(radius > 0.0) || spread > 1e-6)
      fail(ErrorKind::validation,
           "geodesic 'sphere' needs vertices on a common sphere around the origin");
  }

  auto build_density = [&](const DensitySpec& spec) {
    if (!spec.file.empty())
      return load_density_file(out.mesh, spec.file);
    return synth_density(out.mesh, spec.bumps, scenario.geodesic, spec.uniform_floor);
  };
  out.initial = build_density(scenario.initial_density);
  Eigen::VectorXd target;
  if (scenario.target_density)
    target = build_density(*scenario.target_density);

  // Kernels shared between variants with identical settings.
  std::map<std::pair<int, std::pair<double, double>>, std::shared_ptr<const Kernel>> kernels;
  auto get_kernel = [&](const KernelSpec& spec) {
    const auto key = std::make_pair(static_cast<int>(spec.kind),
                                    std::make_pair(spec.mu, spec.sigma));
    auto it = kernels.find(key);
    if (it != kernels.end())
      return it->second;
    std::shared_ptr<const Kernel> kernel;
    if (spec.kind == KernelSpec::Kind::laplacian)
      kernel = std::make_shared<Kernel>(Kernel::mesh_laplacian(out.mesh));
    else
      kernel = std::make_shared<Kernel>(
          Kernel::geodesic_gaussian(out.mesh, spec.mu, spec.sigma, scenario.geodesic));
    kernels.emplace(key, kernel);
    return kernel;
  };

  auto build_cost = [&](const InteractionSpec& interaction, const TerminalSpec& terminal) {
    CostSpec cost;
    cost.averaging = scenario.averaging;
    cost.interaction = interaction.kind;
    cost.interaction_weight = interaction.weight;
    switch (interaction.kind) {
    case InteractionKind::obstacle:
      cost.obstacle = mask_indicator(out.mesh, interaction.region);
      break;
    case InteractionKind::congestion:
      cost.congestion_floor = interaction.floor;
      break;
    case InteractionKind::nonlocal:
    case InteractionKind::dirichlet:
      cost.kernel = get_kernel(interaction.kind == InteractionKind::dirichlet
                                   ? KernelSpec{KernelSpec::Kind::laplacian, 0.0, 0.0}
                                   : interaction.kernel);
      break;
    default:
      break;
    }
    cost.terminal = terminal.kind;
    cost.terminal_weight = terminal.weight;
    switch (terminal.kind) {
    case TerminalKind::quadratic:
    case TerminalKind::kl:
      if (target.size() == 0)
        fail(ErrorKind::validation,
             "terminal cost needs 'target_density' in the scenario");
      cost.target = target;
      break;
    case TerminalKind::obstacle_region:
      cost.terminal_region = mask_indicator(out.mesh, terminal.region);
      break;
    }
    cost.validate(out.mesh);
    return cost;
  };

  if (scenario.variants.empty()) {
    out.variants.push_back({"default", build_cost(scenario.interaction, scenario.terminal)});
  } else {
    std::set<std::string> names;
    for (const auto& variant : scenario.variants) {
      if (variant.name.empty())
        fail(ErrorKind::validation, "variant names must be non-empty");
      if (!names.insert(variant.name).second)
        fail(ErrorKind::validation, "duplicate variant name '" + variant.name + "'");
      out.variants.push_back(
          {variant.name, build_cost(variant.interaction ? *variant.interaction
                                                        : scenario.interaction,
                                    variant.terminal ? *variant.terminal : scenario.terminal)});
    }
  }

  // The cost table's interaction column evaluates one common functional on
  // every variant: an explicit report_interaction, else the first non-vanilla
  // interaction among the variants.
  if (scenario.report_interaction) {
    out.report_cost = build_cost(*scenario.report_interaction, scenario.terminal);
  } else {
    out.report_cost = out.variants.front().cost;
    for (const auto& variant : out.variants)
      if (variant.cost.interaction != InteractionKind::vanilla) {
        out.report_cost = variant.cost;
        break;
      }
  }

  return out;
}

} // namespace mfg
