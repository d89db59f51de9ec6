/* glasskit C interface.
 *
 * Every fallible call returns a gk_status; on failure a message is available
 * from gk_last_error() on the calling thread until its next failing call.
 * Handles are opaque and owned by the caller (free with the matching
 * *_free function; passing NULL is allowed). A constructor that fails
 * leaves its output handle NULL. Handles are immutable after construction
 * and may be shared across threads.
 */
#ifndef GLASSKIT_H
#define GLASSKIT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define GK_API __declspec(dllexport)
#else
#define GK_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gk_status {
  GK_OK = 0,
  GK_ERR_INVALID_MIXTURE = 1,
  GK_ERR_DOMAIN = 2,
  GK_ERR_INVALID_PERTURBATION = 3,
  GK_ERR_SINGULAR_MEASURE = 4,
  GK_ERR_NON_CONVERGENCE = 5,
  GK_ERR_FIELD_RANGE = 6,
  GK_ERR_BOUND_INVALID = 7,
  GK_ERR_RESOLUTION = 8,
  GK_ERR_EMPTY_INTERVAL = 9,
  GK_ERR_TOO_LARGE = 10,
  GK_ERR_SHAPE = 11,
  GK_ERR_DEGENERATE_TEST_FUNCTION = 12,
  GK_ERR_IO = 13,
  GK_ERR_INVALID_ARGUMENT = 14,
  GK_ERR_INTERNAL = 99
} gk_status;

typedef enum gk_geometry { GK_SPHERE = 0, GK_ISING = 1 } gk_geometry;
typedef enum gk_transition { GK_CONTINUOUS = 0, GK_DISCONTINUOUS = 1, GK_MARGINAL = 2 } gk_transition;
typedef enum gk_fp_method { GK_FP_ANNEALED = 0, GK_FP_RS = 1, GK_FP_DUALITY = 2 } gk_fp_method;
typedef enum gk_convention { GK_FIELD_PAPER = 0, GK_FIELD_INDEPENDENT = 1 } gk_convention;

GK_API const char* gk_version(void);
GK_API const char* gk_last_error(void);
GK_API const char* gk_status_name(gk_status status);

/* ---- mixtures ---------------------------------------------------------- */

typedef struct gk_mixture gk_mixture;

/* gamma_k^2 per degree. With normalize != 0 the coefficients are rescaled so xi(1) = 1. */
GK_API gk_status gk_mixture_create(const int* degrees, const double* gamma_sq, size_t count, int normalize,
                                   gk_mixture** out);
/* Reads a mixture file; the result is always normalized. */
GK_API gk_status gk_mixture_load(const char* path, gk_mixture** out);
GK_API void gk_mixture_free(gk_mixture* m);
GK_API gk_status gk_mixture_perturb(const gk_mixture* m, int p, double eps, gk_mixture** out);

/* Identifier from the file (or "" for mixtures built in memory). Owned by the handle. */
GK_API const char* gk_mixture_id(const gk_mixture* m);
/* Writes up to `capacity` (degree, gamma_k^2) pairs; *count receives the total. */
GK_API gk_status gk_mixture_coefficients(const gk_mixture* m, int* degrees, double* gamma_sq, size_t capacity,
                                         size_t* count);
GK_API gk_status gk_mixture_xi(const gk_mixture* m, double q, int order, double* out);
GK_API gk_status gk_entropy(gk_geometry g, double q, double* out);

/* ---- thresholds -------------------------------------------------------- */

typedef struct gk_threshold_report {
  double beta_cont;
  double beta_c;
  double beta_dis;
  double beta_bar_d;
  double beta_d;
  gk_transition transition;
  int has_q_c;
  double q_c;
  int beta_c_at_boundary;
  int beta_bar_d_at_boundary;
} gk_threshold_report;

typedef struct gk_window {
  double lo;
  double hi;
  int degenerate;
} gk_window;

GK_API gk_status gk_thresholds(const gk_mixture* m, gk_threshold_report* out);
GK_API gk_status gk_shattering_windows(const gk_mixture* m, double beta, gk_window* windows, size_t capacity,
                                       size_t* count);
/* Interval of gamma_p^2 for xi = x^2/2 + gamma_p^2 x^p; GK_ERR_EMPTY_INTERVAL when it is empty. */
GK_API gk_status gk_construct_continuous_shattering(int p, double* lo, double* hi);

/* ---- Parisi / Crisanti-Sommers ------------------------------------------ */

#define GK_MAX_ATOMS 9

typedef struct gk_parisi_options {
  int starts;
  int max_iterations;
  uint64_t seed;
  gk_convention convention;
  int hermite_nodes;
} gk_parisi_options;

typedef struct gk_parisi_result {
  double value;
  double phi0;
  double dphi0;
  size_t atoms;
  double q[GK_MAX_ATOMS];
  double w[GK_MAX_ATOMS];
  int converged;
  int evaluations;
} gk_parisi_result;

GK_API void gk_parisi_default_options(gk_parisi_options* opts);
/* Minimum over measures with at most k_levels + 1 atoms. `opts` may be NULL. */
GK_API gk_status gk_parisi_minimize(const gk_mixture* m, double beta, double field, gk_geometry g, int k_levels,
                                    const gk_parisi_options* opts, gk_parisi_result* out);
/* Functional at the measure with atoms q[i] (increasing) and weights w[i]. */
GK_API gk_status gk_parisi_evaluate(const gk_mixture* m, double beta, const double* q, const double* w, size_t atoms,
                                    double field, gk_geometry g, gk_convention conv, gk_parisi_result* out);
GK_API gk_status gk_beta_c_estimate(const gk_mixture* m, int k_levels, gk_geometry g, double* out);

/* ---- Franz-Parisi ------------------------------------------------------- */

typedef struct gk_fp_curve gk_fp_curve;

typedef struct gk_shattering_report {
  int shattered;
  int has_certificate;
  double q1, q2, q_lo_bar, q_hi_bar, certificate_gap;
  int matches_free_energy_at_zero;
  int below_free_energy;
  int has_increasing_window;
} gk_shattering_report;

/* GK_ERR_BOUND_INVALID when beta exceeds the static threshold. */
GK_API gk_status gk_fp_check_beta(const gk_mixture* m, double beta, gk_geometry g, int k_levels);
GK_API gk_status gk_fp_value(const gk_mixture* m, double beta, double q, gk_geometry g, gk_fp_method method,
                             int k_levels, double* out);
GK_API gk_status gk_fp_curve_compute(const gk_mixture* m, double beta, gk_geometry g, gk_fp_method method,
                                     int n_points, int k_levels, gk_fp_curve** out);
GK_API void gk_fp_curve_free(gk_fp_curve* c);
GK_API size_t gk_fp_curve_size(const gk_fp_curve* c);
GK_API gk_status gk_fp_curve_point(const gk_fp_curve* c, size_t i, double* q, double* value);
GK_API double gk_fp_curve_free_energy(const gk_fp_curve* c);
GK_API gk_status gk_fp_classify(const gk_fp_curve* c, gk_shattering_report* out);
GK_API gk_status gk_legendre_check(const gk_mixture* m, double beta, double field, gk_geometry g, int k_levels,
                                   double* lhs, double* rhs);

/* ---- Monte Carlo (Ising) ------------------------------------------------ */

typedef struct gk_instance gk_instance;

typedef struct gk_nishimori_stats {
  int samples;
  double ks_statistic;
  double ks_band;
  double mean_01, mean_12;
  double second_01, second_12;
  double se_01, se_12;
} gk_nishimori_stats;

typedef struct gk_rayleigh_result {
  double dirichlet;
  double variance;
  double quotient;
} gk_rayleigh_result;

/* plant != 0 tilts the couplings at plant_beta around a center drawn from center_seed. */
GK_API gk_status gk_instance_sample(const gk_mixture* m, int n, uint64_t seed, int plant, double plant_beta,
                                    uint64_t center_seed, gk_instance** out);
GK_API void gk_instance_free(gk_instance* inst);
GK_API int gk_instance_size(const gk_instance* inst);
/* Copies the planted center (n entries of +-1); GK_ERR_INVALID_ARGUMENT when not planted. */
GK_API gk_status gk_instance_planted_center(const gk_instance* inst, double* sigma, size_t n);
GK_API gk_status gk_hamiltonian(const gk_instance* inst, const double* sigma, size_t n, double* out);
GK_API gk_status gk_log_partition(const gk_instance* inst, double beta, double* out);
GK_API gk_status gk_log_likelihood_ratio(const gk_instance* inst, double beta, double* out);
GK_API gk_status gk_overlap_moment(const gk_instance* inst, double beta, int p, double* out);
GK_API gk_status gk_nishimori_check(const gk_mixture* m, int n, double beta, int samples, uint64_t seed,
                                    gk_nishimori_stats* out);
/* Writes up to `capacity` per-sweep overlaps with `start`; *count receives the total. */
GK_API gk_status gk_glauber_run(const gk_instance* inst, double beta, const double* start, size_t n, uint64_t steps,
                                uint64_t seed, double* overlaps, size_t capacity, size_t* count, uint64_t* flips);
/* samples = 0 evaluates by enumeration. */
GK_API gk_status gk_rayleigh_quotient(const gk_instance* inst, double beta, const double* sigma0, size_t n,
                                      double ramp_lo, double ramp_hi, int samples, uint64_t seed,
                                      gk_rayleigh_result* out);

#ifdef __cplusplus
}
#endif

#endif /* GLASSKIT_H */
