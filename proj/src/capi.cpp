#include "mfg.h"

#include <cstring>
#include <new>
#include <string>

#include "mfg/errors.hpp"
#include "mfg/mesh.hpp"
#include "mfg/runner.hpp"
#include "mfg/scenario.hpp"

struct mfg_mesh {
  mfg::TriMesh mesh;
};

struct mfg_scenario {
  mfg::Scenario scenario;
};

namespace {

thread_local std::string last_error;

int status_of(mfg::ErrorKind kind) {
  switch (kind) {
  case mfg::ErrorKind::validation: return MFG_ERR_VALIDATION;
  case mfg::ErrorKind::domain:
  case mfg::ErrorKind::solver: return MFG_ERR_SOLVER;
  case mfg::ErrorKind::io: return MFG_ERR_IO;
  }
  return MFG_ERR_SOLVER;
}

// Runs `body`, translating exceptions into status codes + last_error.
template <typename Fn>
int guarded(Fn&& body) {
  try {
    last_error.clear();
    return body();
  } catch (const mfg::Error& e) {
    last_error = e.what();
    return status_of(e.kind());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return MFG_ERR_SOLVER;
  } catch (const std::exception& e) {
    last_error = e.what();
    return MFG_ERR_SOLVER;
  }
}

char* copy_string(const std::string& text) {
  char* out = new char[text.size() + 1];
  std::memcpy(out, text.c_str(), text.size() + 1);
  return out;
}

} // namespace

extern "C" {

const char* mfg_last_error(void) { return last_error.c_str(); }

void mfg_string_free(char* text) { delete[] text; }

int mfg_mesh_load(const char* path, mfg_mesh** out) {
  if (!path || !out) {
    last_error = "null argument";
    return MFG_ERR_VALIDATION;
  }
  return guarded([&] {
    *out = new mfg_mesh{mfg::TriMesh::load(path)};
    return MFG_OK;
  });
}

int mfg_mesh_icosphere(int subdivisions, double radius, mfg_mesh** out) {
  if (!out) {
    last_error = "null argument";
    return MFG_ERR_VALIDATION;
  }
  return guarded([&] {
    *out = new mfg_mesh{mfg::TriMesh::icosphere(subdivisions, radius)};
    return MFG_OK;
  });
}

int mfg_mesh_flat_grid(int nx, int ny, double width, double height, mfg_mesh** out) {
  if (!out) {
    last_error = "null argument";
    return MFG_ERR_VALIDATION;
  }
  return guarded([&] {
    *out = new mfg_mesh{mfg::TriMesh::flat_grid(nx, ny, width, height)};
    return MFG_OK;
  });
}

void mfg_mesh_free(mfg_mesh* mesh) { delete mesh; }

int mfg_mesh_vertex_count(const mfg_mesh* mesh) {
  return mesh ? mesh->mesh.vertex_count() : 0;
}

int mfg_mesh_triangle_count(const mfg_mesh* mesh) {
  return mesh ? mesh->mesh.triangle_count() : 0;
}

double mfg_mesh_total_area(const mfg_mesh* mesh) {
  return mesh ? mesh->mesh.total_area() : 0.0;
}

int mfg_mesh_is_closed(const mfg_mesh* mesh) {
  return mesh && mesh->mesh.is_closed() ? 1 : 0;
}

int mfg_mesh_bounding_box(const mfg_mesh* mesh, double out[6]) {
  if (!mesh || !out) {
    last_error = "null argument";
    return MFG_ERR_VALIDATION;
  }
  const auto& v = mesh->mesh.vertices();
  for (int c = 0; c < 3; ++c) {
    out[2 * c] = v.col(c).minCoeff();
    out[2 * c + 1] = v.col(c).maxCoeff();
  }
  return MFG_OK;
}

int mfg_scenario_load(const char* path, mfg_scenario** out) {
  if (!path || !out) {
    last_error = "null argument";
    return MFG_ERR_VALIDATION;
  }
  return guarded([&] {
    *out = new mfg_scenario{mfg::Scenario::parse_file(path)};
    return MFG_OK;
  });
}

int mfg_scenario_parse(const char* text, mfg_scenario** out) {
  if (!text || !out) {
    last_error = "null argument";
    return MFG_ERR_VALIDATION;
  }
  return guarded([&] {
    *out = new mfg_scenario{mfg::Scenario::parse_text(text, "scenario")};
    return MFG_OK;
  });
}

void mfg_scenario_free(mfg_scenario* scenario) { delete scenario; }

int mfg_scenario_set_iterations(mfg_scenario* scenario, int iterations) {
  if (!scenario) {
    last_error = "null scenario";
    return MFG_ERR_VALIDATION;
  }
  scenario->scenario.solver.iterations = iterations;
  return MFG_OK;
}

int mfg_scenario_set_eta(mfg_scenario* scenario, double eta) {
  if (!scenario) {
    last_error = "null scenario";
    return MFG_ERR_VALIDATION;
  }
  scenario->scenario.solver.step_size = eta;
  return MFG_OK;
}

int mfg_scenario_set_deterministic(mfg_scenario* scenario, int deterministic) {
  if (!scenario) {
    last_error = "null scenario";
    return MFG_ERR_VALIDATION;
  }
  scenario->scenario.solver.deterministic = deterministic != 0;
  return MFG_OK;
}

int mfg_scenario_set_output_dir(mfg_scenario* scenario, const char* directory) {
  if (!scenario || !directory) {
    last_error = "null argument";
    return MFG_ERR_VALIDATION;
  }
  scenario->scenario.output.directory = directory;
  return MFG_OK;
}

int mfg_scenario_set_format(mfg_scenario* scenario, const char* format) {
  if (!scenario || !format) {
    last_error = "null argument";
    return MFG_ERR_VALIDATION;
  }
  const std::string value = format;
  if (value != "csv" && value != "vtk") {
    last_error = "format must be csv or vtk";
    return MFG_ERR_VALIDATION;
  }
  scenario->scenario.output.format = value;
  return MFG_OK;
}

int mfg_scenario_validate(const mfg_scenario* scenario) {
  if (!scenario) {
    last_error = "null scenario";
    return MFG_ERR_VALIDATION;
  }
  return guarded([&] {
    mfg::validate_scenario(scenario->scenario);
    return MFG_OK;
  });
}

int mfg_scenario_dump(const mfg_scenario* scenario, char** out) {
  if (!scenario || !out) {
    last_error = "null argument";
    return MFG_ERR_VALIDATION;
  }
  return guarded([&] {
    *out = copy_string(scenario->scenario.dump());
    return MFG_OK;
  });
}

int mfg_scenario_run(const mfg_scenario* scenario, char** summary) {
  if (!scenario) {
    last_error = "null scenario";
    return MFG_ERR_VALIDATION;
  }
  return guarded([&] {
    const mfg::ValidatedScenario validated = mfg::validate_scenario(scenario->scenario);
    const mfg::RunSummary result = mfg::run_scenario(validated);
    if (summary)
      *summary = copy_string(result.table());
    return MFG_OK;
  });
}

int mfg_report_render(const char* run_directory, char** out) {
  if (!run_directory || !out) {
    last_error = "null argument";
    return MFG_ERR_VALIDATION;
  }
  return guarded([&] {
    *out = copy_string(mfg::render_run_report(run_directory));
    return MFG_OK;
  });
}

} // extern "C"
