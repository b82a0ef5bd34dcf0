// Command-line front end; all solver functionality comes through the shared
// library's C API.

#include <CLI11.hpp>

#include <cstdio>
#include <string>

#include "mfg.h"

namespace {

int report_failure(int status) {
  std::fprintf(stderr, "error: %s\n", mfg_last_error());
  return status;
}

struct Overrides {
  int iterations = -1;
  double eta = 0.0;
  bool deterministic = false;
  std::string output;
  std::string format;

  int apply(mfg_scenario* scenario) const {
    if (iterations > 0)
      if (int rc = mfg_scenario_set_iterations(scenario, iterations))
        return rc;
    if (eta > 0.0)
      if (int rc = mfg_scenario_set_eta(scenario, eta))
        return rc;
    if (deterministic)
      if (int rc = mfg_scenario_set_deterministic(scenario, 1))
        return rc;
    if (!output.empty())
      if (int rc = mfg_scenario_set_output_dir(scenario, output.c_str()))
        return rc;
    if (!format.empty())
      if (int rc = mfg_scenario_set_format(scenario, format.c_str()))
        return rc;
    return MFG_OK;
  }
};

struct ScenarioHandle {
  mfg_scenario* ptr = nullptr;
  ~ScenarioHandle() { mfg_scenario_free(ptr); }
};

struct StringHandle {
  char* ptr = nullptr;
  ~StringHandle() { mfg_string_free(ptr); }
};

int run_solve(const std::string& path, const Overrides& overrides) {
  ScenarioHandle scenario;
  if (int rc = mfg_scenario_load(path.c_str(), &scenario.ptr))
    return report_failure(rc);
  if (int rc = overrides.apply(scenario.ptr))
    return report_failure(rc);
  StringHandle summary;
  if (int rc = mfg_scenario_run(scenario.ptr, &summary.ptr))
    return report_failure(rc);
  std::printf("%s", summary.ptr);
  return 0;
}

int run_validate(const std::string& path) {
  ScenarioHandle scenario;
  if (int rc = mfg_scenario_load(path.c_str(), &scenario.ptr))
    return report_failure(rc);
  if (int rc = mfg_scenario_validate(scenario.ptr))
    return report_failure(rc);
  std::printf("%s: ok\n", path.c_str());
  return 0;
}

int run_dump(const std::string& path) {
  ScenarioHandle scenario;
  if (int rc = mfg_scenario_load(path.c_str(), &scenario.ptr))
    return report_failure(rc);
  StringHandle text;
  if (int rc = mfg_scenario_dump(scenario.ptr, &text.ptr))
    return report_failure(rc);
  std::printf("%s", text.ptr);
  return 0;
}

int run_report(const std::string& directory) {
  StringHandle text;
  if (int rc = mfg_report_render(directory.c_str(), &text.ptr))
    return report_failure(rc);
  std::printf("%s", text.ptr);
  return 0;
}

int run_mesh_info(const std::string& path) {
  mfg_mesh* mesh = nullptr;
  if (int rc = mfg_mesh_load(path.c_str(), &mesh))
    return report_failure(rc);
  double box[6];
  mfg_mesh_bounding_box(mesh, box);
  std::printf("mesh:      %s\n", path.c_str());
  std::printf("vertices:  %d\n", mfg_mesh_vertex_count(mesh));
  std::printf("triangles: %d\n", mfg_mesh_triangle_count(mesh));
  std::printf("area:      %.12g\n", mfg_mesh_total_area(mesh));
  std::printf("closed:    %s\n", mfg_mesh_is_closed(mesh) ? "yes" : "no");
  std::printf("bbox:      [%.6g, %.6g] x [%.6g, %.6g] x [%.6g, %.6g]\n", box[0], box[1],
              box[2], box[3], box[4], box[5]);
  mfg_mesh_free(mesh);
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mean-field games on triangle meshes"};
  app.require_subcommand(1);

  std::string scenario_path, run_dir, mesh_path;
  Overrides overrides;

  auto add_overrides = [&](CLI::App* cmd) {
    cmd->add_option("--iterations", overrides.iterations, "Override the iteration budget");
    cmd->add_option("--eta", overrides.eta, "Override the gradient step size");
    cmd->add_flag("--deterministic", overrides.deterministic,
                  "Force deterministic (sequential) reductions");
    cmd->add_option("--output", overrides.output, "Override the output directory");
    cmd->add_option("--format", overrides.format, "Snapshot format: csv or vtk");
  };

  CLI::App* solve = app.add_subcommand("solve", "Solve a scenario and write its artifacts");
  solve->add_option("scenario", scenario_path, "Scenario file")->required();
  add_overrides(solve);

  CLI::App* validate = app.add_subcommand("validate", "Check a scenario without solving");
  validate->add_option("scenario", scenario_path, "Scenario file")->required();

  CLI::App* dump = app.add_subcommand("dump", "Print the normalized scenario");
  dump->add_option("scenario", scenario_path, "Scenario file")->required();

  CLI::App* report = app.add_subcommand("report", "Summarize a finished run directory");
  report->add_option("run_dir", run_dir, "Run directory")->required();

  CLI::App* mesh_info = app.add_subcommand("mesh-info", "Print mesh statistics");
  mesh_info->add_option("mesh", mesh_path, "OFF or OBJ mesh file")->required();

  CLI11_PARSE(app, argc, argv);

  if (solve->parsed())
    return run_solve(scenario_path, overrides);
  if (validate->parsed())
    return run_validate(scenario_path);
  if (dump->parsed())
    return run_dump(scenario_path);
  if (report->parsed())
    return run_report(run_dir);
  if (mesh_info->parsed())
    return run_mesh_info(mesh_path);
  return 0;
}
