#ifndef KDIMER_KDIMER_H
#define KDIMER_KDIMER_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define KD_API __declspec(dllexport)
#else
#define KD_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Every fallible call returns a status; on failure kd_last_error() holds a
 * message for the calling thread until its next kd_* call. */
typedef enum kd_status {
  KD_OK = 0,
  KD_ERR_ARGUMENT = 1,
  KD_ERR_PRECONDITION = 2,
  KD_ERR_NUMERIC = 3,
  KD_ERR_IO = 4,
  KD_ERR_CONFIG = 5,
  KD_ERR_INTERNAL = 6
} kd_status;

KD_API const char* kd_version(void);
KD_API const char* kd_last_error(void);
KD_API const char* kd_status_name(kd_status status);

/* Largest deviation of the BLAS/LAPACK backend from reference arithmetic on a
 * small probe; values above 1e-9 mean the backend returns wrong results. */
KD_API kd_status kd_blas_selfcheck(double* deviation);

/* Complex arrays are interleaved (re, im) doubles; matrices are column-major
 * over the ascending-m basis m = -J..J. */

typedef struct kd_floquet kd_floquet;

KD_API kd_status kd_floquet_create(int two_j, double k, double mu, double tau, kd_floquet** out);
KD_API void kd_floquet_destroy(kd_floquet* u);
KD_API int kd_floquet_dim(const kd_floquet* u);
/* `out` holds 2 * dim * dim doubles. */
KD_API kd_status kd_floquet_matrix(const kd_floquet* u, double* out, size_t len);
KD_API kd_status kd_floquet_unitarity_defect(const kd_floquet* u, double* defect);
/* max |[U, P]| with P = e^{i pi J} e^{i pi Jx} */
KD_API kd_status kd_floquet_parity_defect(const kd_floquet* u, double* defect);

typedef struct kd_eigensystem kd_eigensystem;

/* Eigenphases in [-pi, pi), ascending. Without vectors only the phases exist. */
KD_API kd_status kd_eigensystem_compute(const kd_floquet* u, int with_vectors,
                                        kd_eigensystem** out);
KD_API void kd_eigensystem_destroy(kd_eigensystem* es);
KD_API int kd_eigensystem_dim(const kd_eigensystem* es);
KD_API kd_status kd_eigensystem_phases(const kd_eigensystem* es, double* out, size_t len);
/* `out` holds 2 * dim doubles. */
KD_API kd_status kd_eigensystem_vector(const kd_eigensystem* es, int index, double* out,
                                       size_t len);
KD_API kd_status kd_eigensystem_residual(const kd_eigensystem* es, const kd_floquet* u,
                                         double* residual);

/* Mean consecutive spacing ratio of ascending eigenphases on the circle.
 * `dropped` counts ratios discarded for degenerate spacings; may be NULL. */
KD_API kd_status kd_mean_spacing_ratio(const double* phases, size_t n, double* mean_r,
                                       int* dropped);

/* Spin coherent state |theta, phi>, 2 * (two_j + 1) doubles. */
KD_API kd_status kd_coherent_state(int two_j, double theta, double phi, double* out, size_t len);
/* Fractal dimension D_q and participation number M_2 of |theta, phi> in the eigenbasis. */
KD_API kd_status kd_fractal_dimension(const kd_eigensystem* es, double theta, double phi,
                                      double q, double* dq);
KD_API kd_status kd_participation_number(const kd_eigensystem* es, double theta, double phi,
                                         double* m2);

/* Classical map: RK4 flow of duration tau with step dt, then rotation by mu. */
typedef struct kd_map_params {
  double k;
  double mu;
  double tau;
  double dt;
} kd_map_params;

KD_API kd_status kd_classical_iterate(const kd_map_params* p, double theta, double phi, int times,
                                      double* theta_out, double* phi_out);
/* *period is 0 when no period up to max_period closes within tol. */
KD_API kd_status kd_orbit_period(const kd_map_params* p, double theta, double phi, int max_period,
                                 double tol, int* period);
KD_API kd_status kd_refine_periodic_point(const kd_map_params* p, double theta, double phi,
                                          int period, double* theta_out, double* phi_out,
                                          double* residual);

/* Time series of length kicks + 1 starting at t = 0. psi has 2 * dim doubles. */
KD_API kd_status kd_sz_series(const kd_floquet* u, const double* psi, size_t psi_len, int kicks,
                              double* out, size_t out_len);
KD_API kd_status kd_otoc_series(const kd_eigensystem* es, const double* psi, size_t psi_len,
                                int kicks, double* out, size_t out_len);
KD_API kd_status kd_entanglement_series(const kd_floquet* u, const double* psi, size_t psi_len,
                                        int s, int kicks, double* out, size_t out_len);

/* Experiment harness. Strings may be NULL (unset); workers <= 0 is unset. */
typedef struct kd_run_options {
  const char* out_dir;
  const char* cache_dir;
  int workers;
  int expensive;
  const char* verify_cache; /* "auto", "always" or "never" */
  const char* only_kind;    /* run only documents of this experiment kind */
} kd_run_options;

typedef struct kd_report kd_report;

KD_API void kd_run_options_init(kd_run_options* options);
/* The report is produced whenever the run starts, also when it fails; the
 * returned status mirrors kd_report_exit_code. */
KD_API kd_status kd_run_config_file(const char* path, const kd_run_options* options,
                                    kd_report** report);
KD_API kd_status kd_run_config_text(const char* yaml, const kd_run_options* options,
                                    kd_report** report);
KD_API kd_status kd_run_recipe(const char* name, const kd_run_options* options,
                               kd_report** report);
KD_API void kd_report_destroy(kd_report* report);
/* 0 ok, 2 configuration, 3 numerical, 4 input/output */
KD_API int kd_report_exit_code(const kd_report* report);
KD_API const char* kd_report_message(const kd_report* report);
KD_API size_t kd_report_manifest_count(const kd_report* report);
KD_API const char* kd_report_manifest(const kd_report* report, size_t index);
KD_API int kd_report_cache_hits(const kd_report* report);
KD_API int kd_report_cache_misses(const kd_report* report);

/* Parses and validates every document; *documents receives their count. */
KD_API kd_status kd_config_check(const char* yaml, int expensive, size_t* documents);
KD_API const char* kd_experiment_kinds(void); /* comma separated */

KD_API size_t kd_recipe_count(void);
KD_API const char* kd_recipe_name(size_t index);
KD_API const char* kd_recipe_text(size_t index);
/* Catalog metadata: "figure", "reference_j" (J of the reference run),
 * "desk_j" (J values this recipe uses), "runtime", "summary", "documents".
 * NULL for an unknown index or field. */
KD_API const char* kd_recipe_field(size_t index, const char* field);
KD_API kd_status kd_recipe_find(const char* name, size_t* index);

typedef struct kd_gc_report {
  int removed;
  uint64_t freed_bytes;
  uint64_t remaining_bytes;
  int remaining_entries;
} kd_gc_report;

/* Writes the resolved cache directory (explicit > KDIMER_CACHE > default)
 * into buf; *needed receives the length including the terminator. */
KD_API kd_status kd_cache_dir(const char* explicit_dir, char* buf, size_t cap, size_t* needed);
KD_API kd_status kd_cache_gc(const char* dir, uint64_t max_bytes, kd_gc_report* report);

#ifdef __cplusplus
}
#endif

#endif
