#ifndef BAYESCAL_BAYESCAL_H
#define BAYESCAL_BAYESCAL_H

/* C interface to the bayescal library.
 *
 * Every object is an opaque handle created by a *_new, *_read or producing
 * call and released with the matching *_free. Functions return a status code;
 * on failure bayescal_last_error() describes the problem for the calling
 * thread. Output pointers are only written on success.
 *
 * Vectors of calibration values always have three entries; the third is
 * ignored for two-dimensional data. */

#include <stddef.h>
#include <stdint.h>

#if defined(BAYESCAL_BUILDING_LIBRARY)
#define BAYESCAL_API __attribute__((visibility("default")))
#else
#define BAYESCAL_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bayescal_status {
  BAYESCAL_OK = 0,
  BAYESCAL_E_ARGUMENT = 1,   /* bad argument or violated precondition */
  BAYESCAL_E_PARSE = 2,      /* malformed CSV, draws, summary or config text */
  BAYESCAL_E_IO = 3,         /* filesystem failure */
  BAYESCAL_E_SAMPLER = 4,    /* sampler could not start or warmup fully diverged */
  BAYESCAL_E_DIAGNOSTIC = 5, /* diagnostic undefined for the input */
  BAYESCAL_E_INTERNAL = 6
} bayescal_status;

typedef struct bayescal_dataset bayescal_dataset;
typedef struct bayescal_config bayescal_config;
typedef struct bayescal_fit bayescal_fit;
typedef struct bayescal_draws bayescal_draws;
typedef struct bayescal_summary bayescal_summary;
typedef struct bayescal_study bayescal_study;

BAYESCAL_API const char* bayescal_version(void);
/* Message of the last failed call on this thread, "" if none. */
BAYESCAL_API const char* bayescal_last_error(void);
BAYESCAL_API const char* bayescal_status_name(bayescal_status status);

/* ---- Measurements ---- */

typedef enum bayescal_poses {
  BAYESCAL_POSES_GRID = 0,        /* square angle grid, 3D */
  BAYESCAL_POSES_RANDOM = 1,      /* uniform on the sphere or circle */
  BAYESCAL_POSES_FULL_CIRCLE = 2, /* evenly spaced around the circle, 2D */
  BAYESCAL_POSES_HALF_CIRCLE = 3  /* 0 to pi inclusive, 2D */
} bayescal_poses;

typedef struct bayescal_params {
  double b[3];
  double s[3];
  double sigma;
  int dims; /* 2 or 3 */
} bayescal_params;

typedef struct bayescal_simulation {
  bayescal_params truth;
  bayescal_poses poses;
  size_t n;              /* number of poses */
  size_t burst;          /* readings per pose, >= 1; adds pose_id when > 1 */
  int reference_pose;    /* nonzero: first pose is +z (3D) or +x (2D) */
  const char* unit_id;   /* NULL for unlabelled rows */
  uint64_t seed;
} bayescal_simulation;

/* Defaults: b = 0, s = 1, sigma = 0.02, 3D grid of 400 poses, burst 1, seed 1. */
BAYESCAL_API void bayescal_simulation_init(bayescal_simulation* sim);
BAYESCAL_API bayescal_status bayescal_simulate(const bayescal_simulation* sim, bayescal_dataset** out);

/* dims 0 decides from the header (az present means 3D). */
BAYESCAL_API bayescal_status bayescal_dataset_read(const char* path, int dims, bayescal_dataset** out);
BAYESCAL_API bayescal_status bayescal_dataset_write(const bayescal_dataset* d, const char* path);
BAYESCAL_API bayescal_status bayescal_dataset_from_rows(const double* rows, size_t n, int dims,
                                                        bayescal_dataset** out);
BAYESCAL_API size_t bayescal_dataset_size(const bayescal_dataset* d);
BAYESCAL_API int bayescal_dataset_dims(const bayescal_dataset* d);
/* Copies `dims` values of row i into out. */
BAYESCAL_API bayescal_status bayescal_dataset_row(const bayescal_dataset* d, size_t i, double* out);
/* Appends the rows of src (labels included) to dst. */
BAYESCAL_API bayescal_status bayescal_dataset_append(bayescal_dataset* dst, const bayescal_dataset* src);
BAYESCAL_API void bayescal_dataset_free(bayescal_dataset* d);

/* a_cal = (a - b) / s on every row. */
BAYESCAL_API bayescal_status bayescal_calibrate(const bayescal_dataset* d, const double b[3], const double s[3],
                                                bayescal_dataset** out);
/* Each row uses the medians of its unit_id block in the summary. */
BAYESCAL_API bayescal_status bayescal_calibrate_with_summary(const bayescal_dataset* d, const bayescal_summary* s,
                                                             bayescal_dataset** out);
/* Mean of | |a| - 1 | over the rows. */
BAYESCAL_API bayescal_status bayescal_mean_radial_error(const bayescal_dataset* d, double* out);
/* row,unit_id,norm_raw,norm_calibrated */
BAYESCAL_API bayescal_status bayescal_write_norms(const bayescal_dataset* raw, const bayescal_dataset* calibrated,
                                                  const char* path);

/* ---- Run configuration ---- */

BAYESCAL_API bayescal_config* bayescal_config_new(void);
BAYESCAL_API bayescal_status bayescal_config_read(const char* path, bayescal_config** out);
BAYESCAL_API bayescal_status bayescal_config_write(const bayescal_config* c, const char* path);
BAYESCAL_API void bayescal_config_free(bayescal_config* c);
/* "full" or "odr" */
BAYESCAL_API bayescal_status bayescal_config_set_model(bayescal_config* c, const char* model);
BAYESCAL_API bayescal_status bayescal_config_set_dims(bayescal_config* c, int dims);
BAYESCAL_API bayescal_status bayescal_config_set_seed(bayescal_config* c, uint64_t seed);
BAYESCAL_API bayescal_status bayescal_config_set_chains(bayescal_config* c, int chains);
BAYESCAL_API bayescal_status bayescal_config_set_warmup(bayescal_config* c, int warmup);
BAYESCAL_API bayescal_status bayescal_config_set_samples(bayescal_config* c, int samples);
BAYESCAL_API bayescal_status bayescal_config_set_average_poses(bayescal_config* c, int on);
BAYESCAL_API bayescal_status bayescal_config_set_thresholds(bayescal_config* c, double rhat_max, double ess_frac);
BAYESCAL_API const char* bayescal_config_model(const bayescal_config* c);
BAYESCAL_API int bayescal_config_dims(const bayescal_config* c);

/* ---- Fitting ---- */

/* Fits every unit_id of the dataset independently. A fit that fails the
 * convergence verdict still succeeds here; check bayescal_fit_converged. */
BAYESCAL_API bayescal_status bayescal_fit_run(const bayescal_dataset* d, const bayescal_config* c,
                                              bayescal_fit** out);
BAYESCAL_API void bayescal_fit_free(bayescal_fit* f);
BAYESCAL_API int bayescal_fit_converged(const bayescal_fit* f);
BAYESCAL_API size_t bayescal_fit_units(const bayescal_fit* f);
BAYESCAL_API const char* bayescal_fit_unit_id(const bayescal_fit* f, size_t unit);
BAYESCAL_API int bayescal_fit_unit_converged(const bayescal_fit* f, size_t unit);
BAYESCAL_API size_t bayescal_fit_warning_count(const bayescal_fit* f, size_t unit);
BAYESCAL_API const char* bayescal_fit_warning(const bayescal_fit* f, size_t unit, size_t i);
BAYESCAL_API size_t bayescal_fit_reason_count(const bayescal_fit* f, size_t unit);
BAYESCAL_API const char* bayescal_fit_reason(const bayescal_fit* f, size_t unit, size_t i);
/* Posterior median and 90% interval of a named parameter ("b1", "s2", "sigma", ...). */
BAYESCAL_API bayescal_status bayescal_fit_quantiles(const bayescal_fit* f, size_t unit, const char* name,
                                                    double* median, double* q05, double* q95);
/* Medians of b and s (s from sinv for the radial model). */
BAYESCAL_API bayescal_status bayescal_fit_medians(const bayescal_fit* f, size_t unit, double b[3], double s[3]);
/* Structured-text summary of every unit, and its flat CSV twin. */
BAYESCAL_API bayescal_status bayescal_fit_write_summary(const bayescal_fit* f, const bayescal_config* c,
                                                        const char* path);
BAYESCAL_API bayescal_status bayescal_fit_write_summary_csv(const bayescal_fit* f, const char* path);
/* chain,iteration,<parameters> for one unit. */
BAYESCAL_API bayescal_status bayescal_fit_write_draws(const bayescal_fit* f, size_t unit, const char* path);

/* ---- Summaries ---- */

BAYESCAL_API bayescal_status bayescal_summary_read(const char* path, bayescal_summary** out);
BAYESCAL_API void bayescal_summary_free(bayescal_summary* s);
BAYESCAL_API size_t bayescal_summary_units(const bayescal_summary* s);
BAYESCAL_API const char* bayescal_summary_unit_id(const bayescal_summary* s, size_t unit);
BAYESCAL_API int bayescal_summary_dims(const bayescal_summary* s, size_t unit);
BAYESCAL_API bayescal_status bayescal_summary_medians(const bayescal_summary* s, size_t unit, double b[3],
                                                      double s_out[3]);

/* ---- Draws and diagnostics ---- */

BAYESCAL_API bayescal_status bayescal_draws_read(const char* path, bayescal_draws** out);
BAYESCAL_API void bayescal_draws_free(bayescal_draws* d);
BAYESCAL_API size_t bayescal_draws_params(const bayescal_draws* d);
BAYESCAL_API const char* bayescal_draws_name(const bayescal_draws* d, size_t param);
BAYESCAL_API int bayescal_draws_chains(const bayescal_draws* d);
BAYESCAL_API int bayescal_draws_samples(const bayescal_draws* d);
/* Split R-hat and ESS; *defined is 0 when the diagnostic is undefined
 * (e.g. constant draws) and the value is left untouched. */
BAYESCAL_API bayescal_status bayescal_draws_rhat(const bayescal_draws* d, size_t param, double* value, int* defined);
BAYESCAL_API bayescal_status bayescal_draws_ess(const bayescal_draws* d, size_t param, double* value, int* defined);
/* chain,iteration,parameter,value */
BAYESCAL_API bayescal_status bayescal_draws_write_trace(const bayescal_draws* d, const char* path);
/* parameter,median,q05,q95,mean,sd,rhat,ess with NA for undefined values.
 * *pass receives the verdict under the given thresholds. */
BAYESCAL_API bayescal_status bayescal_draws_write_diagnostics(const bayescal_draws* d, double rhat_max,
                                                              double ess_frac, const char* path, int* pass);

/* ---- Simulation studies ---- */

/* "sim2d", "sim3d" or "coverage", with the study's default truth, N values,
 * 2000 warmup and 1000 samples. */
BAYESCAL_API bayescal_status bayescal_study_new(const char* kind, bayescal_study** out);
BAYESCAL_API void bayescal_study_free(bayescal_study* s);
BAYESCAL_API bayescal_status bayescal_study_set_n(bayescal_study* s, const size_t* n, size_t count);
BAYESCAL_API bayescal_status bayescal_study_set_replications(bayescal_study* s, int replications);
BAYESCAL_API bayescal_status bayescal_study_set_seed(bayescal_study* s, uint64_t seed);
/* Copies chains, warmup, samples, thresholds and priors; the model applies to coverage only. */
BAYESCAL_API bayescal_status bayescal_study_set_run(bayescal_study* s, const bayescal_config* c);
BAYESCAL_API bayescal_status bayescal_study_run(bayescal_study* s);
/* Cells whose fit raised an error. */
BAYESCAL_API int bayescal_study_failed(const bayescal_study* s);
BAYESCAL_API bayescal_status bayescal_study_write_rows(const bayescal_study* s, const char* path);
BAYESCAL_API bayescal_status bayescal_study_write_coverage(const bayescal_study* s, const char* path);
BAYESCAL_API size_t bayescal_study_coverage_count(const bayescal_study* s);
BAYESCAL_API bayescal_status bayescal_study_coverage(const bayescal_study* s, size_t i, const char** parameter,
                                                     size_t* n, int* hits, int* total);

#ifdef __cplusplus
}
#endif

#endif
