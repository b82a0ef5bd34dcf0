#include "mfg/runner.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "mfg/errors.hpp"

namespace mfg {

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

Json kkt_json(const KktResidual& kkt) {
  return {{"density", kkt.density},
          {"flux", kkt.flux},
          {"continuity", kkt.continuity},
          {"max", kkt.max()},
          {"min", kkt.min()}};
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out)
    fail(ErrorKind::io, "cannot write file: " + path);
  out << text;
  if (!out)
    fail(ErrorKind::io, "write failed: " + path);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    fail(ErrorKind::io, "cannot read file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

Json report_json(const RunSummary::Row& row, const std::string& scenario_name) {
  const SolveReport& report = row.report;
  Json j;
  j["scenario"] = scenario_name;
  j["variant"] = row.variant;
  j["costs"] = {{"total", report.final_costs.total},
                {"dynamic", report.final_costs.dynamic},
                {"interaction", report.final_costs.interaction},
                {"terminal", report.final_costs.terminal}};
  j["report_interaction_value"] = row.interaction;
  j["kkt"] = {{"initial", kkt_json(report.kkt_initial)},
              {"first_iteration", kkt_json(report.kkt_first_iteration)},
              {"final", kkt_json(report.kkt_final)}};
  j["min_density"] = report.min_density;
  j["max_continuity_residual"] = report.max_continuity_residual;
  j["max_mass_error"] = report.max_mass_error;
  j["iterations"] = report.iterations_run;
  j["precompute_seconds"] = report.precompute_seconds;
  j["solve_seconds"] = report.solve_seconds;
  j["objective_trace"] = report.objective_trace;
  return j;
}

} // namespace

std::string RunSummary::table() const {
  std::ostringstream out;
  out << std::left << std::setw(16) << "variant" << std::right << std::setw(14)
      << "dynamic" << std::setw(14) << "interaction" << std::setw(14) << "terminal" << "\n";
  for (const auto& row : rows) {
    out << std::left << std::setw(16) << row.variant << std::right << std::setprecision(4)
        << std::setw(14) << row.dynamic << std::setw(14) << row.interaction << std::setw(14)
        << row.terminal << "\n";
  }
  return out.str();
}

RunSummary run_scenario(const ValidatedScenario& scenario) {
  RunSummary summary;
  summary.output_directory = scenario.output.directory;

  std::error_code ec;
  fs::create_directories(scenario.output.directory, ec);
  if (ec)
    fail(ErrorKind::io, "cannot create output directory " + scenario.output.directory + ": " +
                            ec.message());
  write_text((fs::path(scenario.output.directory) / "scenario.json").string(),
             scenario.normalized);

  const int n = scenario.time_steps;
  const ProjectionOperator op(scenario.mesh, n);

  for (const auto& variant : scenario.variants) {
    SolveResult result = pgd_solve(scenario.mesh, variant.cost, scenario.initial, n,
                                   scenario.solver, &op);

    RunSummary::Row row;
    row.variant = variant.name;
    row.dynamic = result.report.final_costs.dynamic;
    row.terminal = result.report.final_costs.terminal;
    // Interaction column: one common functional across variants.
    double interaction = 0.0;
    for (int k = 0; k + 1 < n; ++k)
      interaction +=
          interaction_value(scenario.mesh, scenario.report_cost, result.density.values.col(k));
    row.interaction = interaction / n;
    row.report = result.report;

    const fs::path variant_dir = fs::path(scenario.output.directory) / variant.name;
    fs::create_directories(variant_dir, ec);
    if (ec)
      fail(ErrorKind::io, "cannot create directory " + variant_dir.string());
    write_text((variant_dir / "report.json").string(),
               report_json(row, scenario.scenario_name).dump(2) + "\n");
    if (scenario.output.snapshots) {
      if (scenario.output.format == "vtk")
        export_snapshots_vtk(scenario.mesh, result.density.initial, result.density.values,
                             variant_dir.string());
      else
        export_snapshots_csv(scenario.mesh, result.density.initial, result.density.values,
                             variant_dir.string());
    }
    summary.rows.push_back(std::move(row));
  }

  // Cost table mirroring the report layout: one row per variant.
  std::ostringstream csv;
  csv << std::setprecision(17) << "variant,dynamic_cost,interaction_value,terminal_cost\n";
  for (const auto& row : summary.rows)
    csv << row.variant << "," << row.dynamic << "," << row.interaction << "," << row.terminal
        << "\n";
  write_text((fs::path(scenario.output.directory) / "cost_table.csv").string(), csv.str());

  return summary;
}

std::string render_run_report(const std::string& run_directory) {
  const fs::path dir(run_directory);
  if (!fs::is_directory(dir))
    fail(ErrorKind::io, "not a run directory: " + run_directory);

  std::ostringstream out;

  const fs::path scenario_path = dir / "scenario.json";
  if (fs::exists(scenario_path)) {
    try {
      const Json scenario = Json::parse(read_text(scenario_path.string()));
      out << "scenario: " << scenario.value("name", std::string("?")) << "\n";
    } catch (const nlohmann::json::exception&) {
      out << "scenario: (unreadable scenario.json)\n";
    }
  }

  const fs::path table_path = dir / "cost_table.csv";
  if (!fs::exists(table_path))
    fail(ErrorKind::io, "missing cost_table.csv in " + run_directory);

  std::istringstream table(read_text(table_path.string()));
  std::string line;
  std::getline(table, line); // header
  out << std::left << std::setw(16) << "variant" << std::right << std::setw(14) << "dynamic"
      << std::setw(14) << "interaction" << std::setw(14) << "terminal" << "\n";
  std::vector<std::string> variants;
  while (std::getline(table, line)) {
    if (line.empty())
      continue;
    std::istringstream cells(line);
    std::string name, dynamic, interaction, terminal;
    std::getline(cells, name, ',');
    std::getline(cells, dynamic, ',');
    std::getline(cells, interaction, ',');
    std::getline(cells, terminal, ',');
    auto shorten = [](const std::string& v) {
      std::ostringstream s;
      s << std::setprecision(4) << std::stod(v);
      return s.str();
    };
    out << std::left << std::setw(16) << name << std::right << std::setw(14)
        << shorten(dynamic) << std::setw(14) << shorten(interaction) << std::setw(14)
        << shorten(terminal) << "\n";
    variants.push_back(name);
  }

  for (const auto& name : variants) {
    const fs::path report_path = dir / name / "report.json";
    if (!fs::exists(report_path))
      continue;
    try {
      const Json report = Json::parse(read_text(report_path.string()));
      const Json& kkt = report.at("kkt").at("final");
      out << name << ": iterations=" << report.value("iterations", 0)
          << " kkt_final(density=" << kkt.value("density", 0.0)
          << ", flux=" << kkt.value("flux", 0.0)
          << ", continuity=" << kkt.value("continuity", 0.0)
          << ", max=" << kkt.value("max", 0.0) << ", min=" << kkt.value("min", 0.0) << ")"
          << " min_density=" << report.value("min_density", 0.0)
          << " time=" << report.value("precompute_seconds", 0.0) << "s+"
          << report.value("solve_seconds", 0.0) << "s\n";
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::io, "malformed report " + report_path.string() + ": " + e.what());
    }
  }
  return out.str();
}

} // namespace mfg
