#ifndef NLFD_H
#define NLFD_H

/* C interface to the nlfd library.  Every object is an opaque handle released with its
 * matching *_free function.  Functions returning nlfd_status leave a message retrievable
 * with nlfd_last_error() (thread-local) on failure. */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum nlfd_status {
  NLFD_OK = 0,
  NLFD_INVALID_ARGUMENT = 1,
  NLFD_SINGULAR_POINT = 2,
  NLFD_DEGENERATE_BALL = 3,
  NLFD_GRID_MISMATCH = 4,
  NLFD_NO_BARENBLATT = 5,
  NLFD_NEWTON_FAILURE = 6,
  NLFD_SCHEME_VIOLATION = 7,
  NLFD_CONFIG_ERROR = 8,
  NLFD_IO_ERROR = 9,
  NLFD_NOT_APPLICABLE = 10,
  NLFD_INTERNAL_ERROR = 99
} nlfd_status;

typedef enum nlfd_boundary { NLFD_EXTERIOR_ZERO = 0, NLFD_PERIODIC = 1 } nlfd_boundary;

typedef enum nlfd_check_status {
  NLFD_CHECK_PASS = 0,
  NLFD_CHECK_FAIL = 1,
  NLFD_CHECK_NOT_APPLICABLE = 2
} nlfd_check_status;

typedef struct nlfd_grid nlfd_grid;
typedef struct nlfd_field nlfd_field;
typedef struct nlfd_kernel nlfd_kernel;
typedef struct nlfd_nonlinearity nlfd_nonlinearity;
typedef struct nlfd_operator nlfd_operator;
typedef struct nlfd_trajectory nlfd_trajectory;
typedef struct nlfd_scenario nlfd_scenario;
typedef struct nlfd_report nlfd_report;

const char* nlfd_version(void);
const char* nlfd_last_error(void);
const char* nlfd_status_string(nlfd_status status);

/* 0 selects hardware concurrency. */
void nlfd_set_threads(int threads);

/* Grids and fields. */
nlfd_status nlfd_grid_create(int dim, double half_width, int points, nlfd_boundary mode,
                             nlfd_grid** out);
void nlfd_grid_free(nlfd_grid* grid);
size_t nlfd_grid_size(const nlfd_grid* grid);
double nlfd_grid_spacing(const nlfd_grid* grid);

nlfd_status nlfd_field_create(const nlfd_grid* grid, const double* values, nlfd_field** out);
void nlfd_field_free(nlfd_field* field);
size_t nlfd_field_size(const nlfd_field* field);
const double* nlfd_field_data(const nlfd_field* field);
double nlfd_field_integral(const nlfd_field* field);
nlfd_status nlfd_field_write_csv(const nlfd_field* field, const char* path);

/* Kernel ids: "fractional_power", "convolution_modulated", "midpoint_general".
 * modulation may be NULL ("cos_decay"). */
nlfd_status nlfd_kernel_create(const char* family, int dim, double sigma, double epsilon,
                               const char* modulation, nlfd_kernel** out);
void nlfd_kernel_free(nlfd_kernel* kernel);
nlfd_status nlfd_kernel_eval(const nlfd_kernel* kernel, const double* x, const double* y,
                             double* out);

/* Nonlinearity ids: "pure_power", "perturbed_power".  A <= 0 derives the constant. */
nlfd_status nlfd_nonlinearity_create(const char* family, double m, double epsilon, double A,
                                     nlfd_nonlinearity** out);
void nlfd_nonlinearity_free(nlfd_nonlinearity* phi);
nlfd_status nlfd_nonlinearity_phi(const nlfd_nonlinearity* phi, double s, double* out);

/* Discrete operator. */
nlfd_status nlfd_operator_assemble(const nlfd_grid* grid, const nlfd_kernel* kernel,
                                   uint64_t seed, nlfd_operator** out);
void nlfd_operator_free(nlfd_operator* op);
/* out must hold nlfd_grid_size() values. */
nlfd_status nlfd_operator_apply(const nlfd_operator* op, const double* f, double* out);
nlfd_status nlfd_operator_energy(const nlfd_operator* op, const double* f, const double* g,
                                 double* out);

/* Solver.  snapshot_times may be NULL when count is 0. */
typedef struct nlfd_solver_options {
  double dt_initial;
  double dt_max;
  double dt_relative_max;
  double t_end;
  double newton_tol;
  double extinction_floor;
  const double* snapshot_times;
  size_t snapshot_count;
} nlfd_solver_options;

void nlfd_solver_options_default(nlfd_solver_options* options);
nlfd_status nlfd_solve(const nlfd_operator* op, const nlfd_nonlinearity* phi,
                       const nlfd_field* u0, const nlfd_solver_options* options,
                       nlfd_trajectory** out);
void nlfd_trajectory_free(nlfd_trajectory* trajectory);
size_t nlfd_trajectory_snapshot_count(const nlfd_trajectory* trajectory);
double nlfd_trajectory_snapshot_time(const nlfd_trajectory* trajectory, size_t index);
/* The returned field is owned by the trajectory. */
const nlfd_field* nlfd_trajectory_snapshot(const nlfd_trajectory* trajectory, size_t index);
double nlfd_trajectory_leaked_mass(const nlfd_trajectory* trajectory);
/* Negative when no extinction event occurred. */
double nlfd_trajectory_extinction_time(const nlfd_trajectory* trajectory);
int nlfd_trajectory_partial(const nlfd_trajectory* trajectory);

/* Self-similar profile of mass M on [-L, L]^N with n points per axis, written as CSV.
 * mass_out (optional) receives the profile mass: grid integral plus the fitted tail beyond L. */
nlfd_status nlfd_barenblatt(double M, double m, double sigma, int N, double half_width,
                            int points, const char* csv_path, double* mass_out);

/* Scenarios. */
nlfd_status nlfd_scenario_load(const char* path, nlfd_scenario** out);
nlfd_status nlfd_scenario_from_json(const char* json_text, nlfd_scenario** out);
void nlfd_scenario_free(nlfd_scenario* scenario);
/* "a.b=value" dotted override; applied before validation. */
nlfd_status nlfd_scenario_set(nlfd_scenario* scenario, const char* assignment);
nlfd_status nlfd_scenario_set_output(nlfd_scenario* scenario, const char* output_dir);
nlfd_status nlfd_scenario_set_seed(nlfd_scenario* scenario, uint64_t seed);
/* Validates the document; on NLFD_CONFIG_ERROR nlfd_last_error lists every problem. */
nlfd_status nlfd_scenario_validate(const nlfd_scenario* scenario);
/* Solves, checks and writes the artifact layout below the output directory. */
nlfd_status nlfd_scenario_run(const nlfd_scenario* scenario, nlfd_report** out);

/* Reports. */
void nlfd_report_free(nlfd_report* report);
size_t nlfd_report_count(const nlfd_report* report);
int nlfd_report_all_passed(const nlfd_report* report);
/* Strings are owned by the report. */
nlfd_status nlfd_report_record(const nlfd_report* report, size_t index, const char** name,
                               nlfd_check_status* status, const char** message);
const char* nlfd_report_json(const nlfd_report* report);

/* Predefined suites ("acceptance", "quick").  The callback, when set, receives each criterion
 * as it finishes.  output_dir may be NULL.  all_passed receives 1 when every criterion passed. */
typedef void (*nlfd_suite_callback)(int id, const char* name, int passed, const char* summary,
                                    double seconds, void* user);
nlfd_status nlfd_suite_run(const char* name, uint64_t seed, const char* output_dir,
                           nlfd_suite_callback callback, void* user, int* all_passed);

#ifdef __cplusplus
}
#endif

#endif
