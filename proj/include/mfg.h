/* C API of the mean-field-game mesh solver.
 *
 * Handles are opaque; every function that can fail returns a status code and
 * leaves a message retrievable with mfg_last_error() (thread-local). Strings
 * returned through char** are owned by the caller and released with
 * mfg_string_free().
 */
#ifndef MFG_H
#define MFG_H

#ifdef __cplusplus
extern "C" {
#endif

enum {
  MFG_OK = 0,
  MFG_ERR_VALIDATION = 1,
  MFG_ERR_SOLVER = 2,
  MFG_ERR_IO = 3,
};

typedef struct mfg_mesh mfg_mesh;
typedef struct mfg_scenario mfg_scenario;

/* Message of the most recent failure on this thread ("" when none). The
 * pointer stays valid until the next failing call on the same thread. */
const char* mfg_last_error(void);

void mfg_string_free(char* text);

/* ----------------------------------------------------------------- meshes */

int mfg_mesh_load(const char* path, mfg_mesh** out);
int mfg_mesh_icosphere(int subdivisions, double radius, mfg_mesh** out);
int mfg_mesh_flat_grid(int nx, int ny, double width, double height, mfg_mesh** out);
void mfg_mesh_free(mfg_mesh* mesh);

int mfg_mesh_vertex_count(const mfg_mesh* mesh);
int mfg_mesh_triangle_count(const mfg_mesh* mesh);
double mfg_mesh_total_area(const mfg_mesh* mesh);
/* 1 when every edge is shared by exactly two triangles. */
int mfg_mesh_is_closed(const mfg_mesh* mesh);
/* Writes xmin,xmax,ymin,ymax,zmin,zmax. */
int mfg_mesh_bounding_box(const mfg_mesh* mesh, double out[6]);

/* -------------------------------------------------------------- scenarios */

int mfg_scenario_load(const char* path, mfg_scenario** out);
int mfg_scenario_parse(const char* text, mfg_scenario** out);
void mfg_scenario_free(mfg_scenario* scenario);

/* Overrides applied before validation / solving. */
int mfg_scenario_set_iterations(mfg_scenario* scenario, int iterations);
int mfg_scenario_set_eta(mfg_scenario* scenario, double eta);
int mfg_scenario_set_deterministic(mfg_scenario* scenario, int deterministic);
int mfg_scenario_set_output_dir(mfg_scenario* scenario, const char* directory);
int mfg_scenario_set_format(mfg_scenario* scenario, const char* format); /* csv | vtk */

/* Full validation: builds the mesh, synthesizes densities, checks costs. */
int mfg_scenario_validate(const mfg_scenario* scenario);

/* Canonical serialization (all defaults materialized). */
int mfg_scenario_dump(const mfg_scenario* scenario, char** out);

/* Validates, solves every variant and writes all artifacts. On success *summary
 * (when non-NULL) receives the cost table as text. */
int mfg_scenario_run(const mfg_scenario* scenario, char** summary);

/* Renders the report of a finished run directory as text. */
int mfg_report_render(const char* run_directory, char** out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* MFG_H */
