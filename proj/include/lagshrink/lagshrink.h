/* C interface to the lagshrink toolkit: Lagrangian self-shrinking tori in R^4.
 *
 * Every function returns an lsk_status; on failure lsk_last_error() holds a
 * message for the calling thread. Handles are opaque and owned by the caller,
 * who releases them with the matching *_free function (NULL is accepted). */
#ifndef LAGSHRINK_H
#define LAGSHRINK_H

#include <stddef.h>
#include <stdint.h>

#if defined(__GNUC__)
#define LSK_API __attribute__((visibility("default")))
#else
#define LSK_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  LSK_OK = 0,
  LSK_E_INVALID_ARGUMENT = 1,
  LSK_E_IO,
  LSK_E_PARSE,
  LSK_E_DEGENERATE_METRIC,
  LSK_E_NOT_LAGRANGIAN,
  LSK_E_FRAME_DEGENERATE,
  LSK_E_NON_INTEGER_PERIOD,
  LSK_E_NOT_CLOSED,
  LSK_E_PROJECTION_DIVERGED,
  LSK_E_PRECONDITION_VIOLATED,
  LSK_E_NOT_CRITICAL,
  LSK_E_MAX_ITERATIONS,
  LSK_E_INSUFFICIENT_SAMPLES,
  LSK_E_MEMORY_GUARD,
  LSK_E_STEP_REJECTED,
  LSK_E_NO_SINGULARITY,
  LSK_E_NOT_CAUCHY,
  LSK_E_NO_DECREASE_FOUND,
  LSK_E_SHOOTING_FAILED,
  LSK_E_NOT_SHRINKER,
  LSK_E_INTERNAL = 99
} lsk_status;

typedef struct lsk_config lsk_config;
typedef struct lsk_map lsk_map;
typedef struct lsk_flow lsk_flow;
typedef struct lsk_piecewise lsk_piecewise;
typedef struct lsk_census lsk_census;

LSK_API const char* lsk_version(void);
LSK_API const char* lsk_status_name(lsk_status s);
LSK_API const char* lsk_last_error(void);

/* Configuration: flat key = value text with a fixed key set. */
LSK_API lsk_status lsk_config_new(lsk_config** out);
LSK_API lsk_status lsk_config_load(const char* path, lsk_config** out);
LSK_API lsk_status lsk_config_set(lsk_config* cfg, const char* key, const char* value);
LSK_API lsk_status lsk_config_get(const lsk_config* cfg, const char* key, char* buf, size_t cap);
/* Writes "key = value" lines; *needed receives the full length including the terminator. */
LSK_API lsk_status lsk_config_echo(const lsk_config* cfg, char* buf, size_t cap, size_t* needed);
LSK_API void lsk_config_free(lsk_config* cfg);

/* Maps: a grid map T^2 -> R^4 with a conformal structure and a time stamp. */
LSK_API lsk_status lsk_map_clifford(int nx, int ny, lsk_map** out);
/* Product of two shrinking curves (p, q) = (1, 1) is the circle of radius sqrt 2. */
LSK_API lsk_status lsk_map_product(int p1, int q1, int p2, int q2, int nx, int ny, lsk_map** out);
/* Product of two round circles of the given radii (not a shrinker unless both are sqrt 2). */
LSK_API lsk_status lsk_map_circles(double r1, double r2, int nx, int ny, lsk_map** out);
/* Clifford torus Lagrangian-perturbed by random closed forms; index 0 is the Clifford torus. */
LSK_API lsk_status lsk_map_perturbed_clifford(int n, int index, double amplitude, uint64_t seed, const lsk_config* cfg,
                                      lsk_map** out);
/* Figure-eight curve times a circle: an immersed, non-embedded test surface. */
LSK_API lsk_status lsk_map_figure_eight(int nx, int ny, lsk_map** out);
LSK_API lsk_status lsk_map_from_values(int nx, int ny, const double* xyz, double tau1, double tau2, double time,
                               lsk_map** out);
LSK_API lsk_status lsk_map_read(const char* path, lsk_map** out);
LSK_API lsk_status lsk_map_write(const lsk_map* map, const char* path);
LSK_API lsk_status lsk_map_info(const lsk_map* map, int* nx, int* ny, double* tau1, double* tau2, double* time);
/* Copies 4 * nx * ny coordinates, node-major, x index fastest. */
LSK_API lsk_status lsk_map_values(const lsk_map* map, double* xyz);
LSK_API lsk_status lsk_map_set_tau(lsk_map* map, double tau1, double tau2);
LSK_API void lsk_map_free(lsk_map* map);

/* Functionals. */
typedef struct {
  double lambda;
  double x0[4];
  double t0;
  int converged;
  /* Search domain that was scanned: x0 box, t0 range and the resolution floor on t0. */
  double box_lo[4], box_hi[4];
  double t_lo, t_hi, t_floor;
  int resolved;
} lsk_entropy_report;

LSK_API lsk_status lsk_entropy(const lsk_map* map, const lsk_config* cfg, lsk_entropy_report* out);
LSK_API lsk_status lsk_area(const lsk_map* map, const lsk_config* cfg, double* out);
LSK_API lsk_status lsk_energy(const lsk_map* map, const lsk_config* cfg, double* out);
LSK_API lsk_status lsk_willmore(const lsk_map* map, const lsk_config* cfg, double* out);
LSK_API lsk_status lsk_shrinker_residual(const lsk_map* map, const lsk_config* cfg, double* residual, double* tolerance);
LSK_API lsk_status lsk_symplectic_residual(const lsk_map* map, const lsk_config* cfg, double* residual, double* tolerance);
LSK_API lsk_status lsk_maslov(const lsk_map* map, const lsk_config* cfg, int* m1, int* m2);
LSK_API lsk_status lsk_embedded(const lsk_map* map, const lsk_config* cfg, int* embedded, double* closest);

/* Variational layer. */
LSK_API lsk_status lsk_critical_point(const lsk_map* map, const lsk_config* cfg, lsk_map** out, double* grad_norm,
                              int* iterations);
/* Eigenvalues of the linearized operator on a spectrum_n grid, ascending.
 * *count receives the total; at most cap values are copied. */
LSK_API lsk_status lsk_spectrum(const lsk_map* map, const lsk_config* cfg, double* eigenvalues, size_t cap, size_t* count);

typedef struct {
  double theta;
  double C2;
  int n_samples;
  double max_violation;
  double slope_mean, slope_min, slope_max;
} lsk_lojasiewicz_fit;

/* samples receives (direction, eps, |E - E_c|, |M|) quadruples, at most cap of them; pass NULL to skip.
 * The critical point is first refined from map. */
LSK_API lsk_status lsk_lojasiewicz(const lsk_map* map, const lsk_config* cfg, lsk_lojasiewicz_fit* out, double* samples,
                           size_t cap, size_t* count);

/* Flow to the first singularity. */
typedef struct {
  double t, dt, area, maxA2, entropy, lag_residual;
} lsk_flow_sample;

typedef struct {
  double T0_est, T0_stderr, type1_constant, fit_residual;
  int is_type1;
  double q_est[4];
  int rescale_converged;
  int rescaled_maps;
  double model_time, model_residual, model_tolerance, max_diameter;
  double entropy_resolved_until;
} lsk_singularity_report;

LSK_API lsk_status lsk_flow_run(const lsk_map* initial, const lsk_config* cfg, lsk_flow** out);
LSK_API lsk_status lsk_flow_report(const lsk_flow* flow, lsk_singularity_report* out);
/* Stop reason of the trajectory and the rescaling note. */
LSK_API lsk_status lsk_flow_notes(const lsk_flow* flow, char* stop_reason, size_t cap1, char* note, size_t cap2);
LSK_API size_t lsk_flow_sample_count(const lsk_flow* flow);
LSK_API lsk_status lsk_flow_sample_at(const lsk_flow* flow, size_t i, lsk_flow_sample* out);
LSK_API size_t lsk_flow_snapshot_count(const lsk_flow* flow);
LSK_API lsk_status lsk_flow_snapshot(const lsk_flow* flow, size_t i, lsk_map** out);
/* The rescaled limit candidate (LSK_E_NOT_CAUCHY when the rescaling did not settle). */
LSK_API lsk_status lsk_flow_model(const lsk_flow* flow, lsk_map** out);
LSK_API void lsk_flow_free(lsk_flow* flow);

/* Piecewise flow with entropy-decreasing perturbations at compact type-I singularities. */
typedef enum { LSK_PIECEWISE_TERMINAL = 0, LSK_PIECEWISE_CAP = 1, LSK_PIECEWISE_ERROR = 2 } lsk_piecewise_outcome;

typedef struct {
  double t;
  char direction[16];
  double s;
  double lambda_before, lambda_after;
  double area_before, area_after;
  double c0_distance, delta_bound;
  int maslov_before[2], maslov_after[2];
  double kappa;
  int cert_lagrangian, cert_area, cert_entropy, cert_c0, cert_maslov;
} lsk_piecewise_event;

typedef struct {
  double t_start, t_end;
  int steps;
  double lambda_start, max_entropy_increase;
  double area_start, area_end;
  int maslov_start[2], maslov_end[2];
  double T0_est, type1_constant;
  int is_type1, compact_model;
  double model_area, model_diameter;
} lsk_piecewise_leg;

LSK_API lsk_status lsk_piecewise_run(const lsk_map* initial, double Lambda, double delta, const lsk_config* cfg,
                             lsk_piecewise** out);
LSK_API lsk_status lsk_piecewise_outcome_of(const lsk_piecewise* log, lsk_piecewise_outcome* outcome, int* event_cap,
                                    double* lambda_initial, char* note, size_t cap);
LSK_API size_t lsk_piecewise_leg_count(const lsk_piecewise* log);
LSK_API lsk_status lsk_piecewise_leg_at(const lsk_piecewise* log, size_t i, lsk_piecewise_leg* out, char* note, size_t cap);
LSK_API lsk_status lsk_piecewise_leg_sample(const lsk_piecewise* log, size_t leg, size_t i, lsk_flow_sample* out,
                                    size_t* count);
LSK_API lsk_status lsk_piecewise_leg_start(const lsk_piecewise* log, size_t i, lsk_map** out);
LSK_API size_t lsk_piecewise_event_count(const lsk_piecewise* log);
LSK_API lsk_status lsk_piecewise_event_at(const lsk_piecewise* log, size_t i, lsk_piecewise_event* out);
LSK_API void lsk_piecewise_free(lsk_piecewise* log);

/* Entropy census of critical points reached from seed maps (each seed carries its tau). */
typedef struct {
  int accepted;
  double area, entropy, grad_norm, shrinker_residual;
  int iterations;
  int embedding_checked, embedded;
} lsk_census_entry;

typedef struct {
  double entropy, spread, area;
  int members;
} lsk_census_cluster;

LSK_API lsk_status lsk_census_run(const lsk_map* const* seeds, const char* const* labels, size_t n, double Lambda,
                          const lsk_config* cfg, lsk_census** out);
LSK_API size_t lsk_census_entry_count(const lsk_census* c);
LSK_API lsk_status lsk_census_entry_at(const lsk_census* c, size_t i, lsk_census_entry* out, char* notice, size_t cap);
LSK_API size_t lsk_census_cluster_count(const lsk_census* c);
LSK_API lsk_status lsk_census_cluster_at(const lsk_census* c, size_t i, lsk_census_cluster* out);
/* Entry indices of cluster i, at most cap of them. */
LSK_API lsk_status lsk_census_cluster_members(const lsk_census* c, size_t i, int* entries, size_t cap);
LSK_API void lsk_census_free(lsk_census* c);

/* Lowercase hex SHA-256 of a file (65 bytes including the terminator). */
LSK_API lsk_status lsk_sha256_file(const char* path, char* hex, size_t cap);

#ifdef __cplusplus
}
#endif

#endif
