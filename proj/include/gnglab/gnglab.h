/* gnglab: Hamiltonian flow of one-dimensional rate functions.
 *
 * Plain C interface over the C++ core. Every fallible call returns a
 * gng_status; on failure gng_last_error() holds a message for the calling
 * thread. Objects are opaque handles released with their *_free function
 * (NULL is accepted). Strings returned through char** are owned by the
 * caller and released with gng_string_free.
 */
#ifndef GNGLAB_GNGLAB_H
#define GNGLAB_GNGLAB_H

#include <stddef.h>

#if defined(_WIN32)
#define GNG_API __declspec(dllexport)
#else
#define GNG_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gng_status {
  GNG_OK = 0,
  GNG_ERR_INVALID_ARGUMENT = 1, /* null handle or output pointer, bad enum */
  GNG_ERR_DOMAIN = 2,
  GNG_ERR_CONFIG = 3,
  GNG_ERR_UNBOUNDED_VELOCITY = 4,
  GNG_ERR_INTEGRATION_FAILURE = 5,
  GNG_ERR_ESCAPED = 6,
  GNG_ERR_COVERAGE = 7,
  GNG_ERR_INAPPLICABLE = 8,
  GNG_ERR_BRACKET = 9,
  GNG_ERR_NON_ROTATING = 10,
  GNG_ERR_PRECONDITION = 11,
  GNG_ERR_IO = 12,
  GNG_ERR_INTERNAL = 13
} gng_status;

GNG_API const char* gng_version(void);
GNG_API const char* gng_status_name(gng_status status);
/* Message of the last failure on this thread; "" when there was none. */
GNG_API const char* gng_last_error(void);
GNG_API void gng_string_free(char* s);
/* Caps worker threads; 0 restores GNGLAB_THREADS or the hardware count. */
GNG_API gng_status gng_set_threads(int n);

/* ---- models ---------------------------------------------------------- */

typedef struct gng_model gng_model;

GNG_API gng_status gng_model_curie_weiss(double beta, double h, gng_model** out);
/* Potential W given by coefficients, low-to-high degree. */
GNG_API gng_status gng_model_diffusion(const double* coeffs, size_t n, gng_model** out);
/* W(x) = x^4/4 - b x^2/2. */
GNG_API gng_status gng_model_double_well(double b, gng_model** out);
GNG_API void gng_model_free(gng_model* model);

GNG_API gng_status gng_hamiltonian(const gng_model* model, double x, double p, double* out);
GNG_API gng_status gng_lagrangian(const gng_model* model, double x, double v, double* value,
                                  double* p_star);
/* Writes up to cap points; *count receives the total number found. */
GNG_API gng_status gng_stationary_points(const gng_model* model, double* out, size_t cap,
                                         size_t* count);

/* ---- initial rate functions ------------------------------------------ */

typedef struct gng_rate gng_rate;

GNG_API gng_status gng_rate_cw_entropy(double alpha, double theta, gng_rate** out);
GNG_API gng_status gng_rate_polynomial(const double* coeffs, size_t n, gng_rate** out);
/* I0(x) = x^4/4 - a x^2/2 plus the normalizing constant. */
GNG_API gng_status gng_rate_double_well(double a, gng_rate** out);
GNG_API gng_status gng_rate_tabulated(const double* xs, const double* values, const double* derivs,
                                      size_t n, double slope_threshold, gng_rate** out);
GNG_API void gng_rate_free(gng_rate* rate);
/* Any of the outputs may be NULL. */
GNG_API gng_status gng_rate_eval(const gng_rate* rate, double x, double* value, double* deriv,
                                 double* second_deriv);

/* ---- options (plain structs, fill with the *_defaults functions) ---------- */

typedef struct gng_integrator_options {
  double rel_tol;
  double abs_tol;
  double max_step;
  double p_cap;
  double boundary_margin;
} gng_integrator_options;

typedef struct gng_graph_options {
  size_t samples;  /* initial graph samples before refinement */
  double margin;   /* distance kept from the ends of the rate's domain */
  double p_window; /* polynomial data: sample where |I0'| <= p_window */
  int refine;      /* non-zero: adaptive refinement of the pushed graph */
} gng_graph_options;

typedef struct gng_profile_options {
  double lo, hi; /* reconstruction window; lo >= hi selects the default */
  size_t points;
  size_t dp_steps; /* default 8; accuracy needs dx much smaller than (t / dp_steps) * speed */
  double cfl;
} gng_profile_options;

GNG_API void gng_integrator_defaults(gng_integrator_options* out);
GNG_API void gng_graph_defaults(gng_graph_options* out);
GNG_API void gng_profile_defaults(gng_profile_options* out);

/* NULL option pointers mean defaults throughout. */

/* ---- characteristics ------------------------------------------------- */

typedef struct gng_trajectory gng_trajectory;

GNG_API gng_status gng_flow_integrate(const gng_model* model, double x, double p, double u0,
                                      double t_end, const gng_integrator_options* opts,
                                      gng_trajectory** out);
/* corner is -1 or +1 when escaped, 0 otherwise; escape_time is +inf when alive. */
GNG_API gng_status gng_trajectory_info(const gng_trajectory* tr, size_t* n_samples, int* escaped,
                                       int* corner, double* escape_time, double* energy_drift);
GNG_API gng_status gng_trajectory_sample(const gng_trajectory* tr, size_t i, double* t, double* x,
                                         double* p, double* u, double* energy);
GNG_API gng_status gng_trajectory_csv(const gng_trajectory* tr, char** out);
GNG_API gng_status gng_trajectory_json(const gng_trajectory* tr, char** out);
GNG_API void gng_trajectory_free(gng_trajectory* tr);

/* Escape time from (x, p); +inf when still alive at t = 1000. */
GNG_API gng_status gng_escape_time(const gng_model* model, double x, double p,
                                   const gng_integrator_options* opts, double* out);

/* ---- pushed graph ---------------------------------------------------- */

typedef struct gng_pushforward gng_pushforward;

GNG_API gng_status gng_push(const gng_model* model, const gng_rate* rate, double t,
                            const gng_graph_options* graph, const gng_integrator_options* opts,
                            gng_pushforward** out);
GNG_API gng_status gng_pushforward_is_graph(const gng_pushforward* pf, int* out);
GNG_API gng_status gng_pushforward_csv(const gng_pushforward* pf, char** out);
/* Overhang regions, witnesses, escaped fraction and warnings. */
GNG_API gng_status gng_pushforward_json(const gng_pushforward* pf, char** out);
GNG_API gng_status gng_pushforward_svg(const gng_pushforward* pf, const char* title, char** out);
GNG_API void gng_pushforward_free(gng_pushforward* pf);

/* ---- evolved rate function ------------------------------------------- */

typedef enum gng_rate_method {
  GNG_METHOD_ENVELOPE = 0,
  GNG_METHOD_HOPF_LAX_DP = 1,
  GNG_METHOD_FINITE_DIFFERENCE = 2
} gng_rate_method;

typedef struct gng_profile gng_profile;

GNG_API gng_status gng_rate_profile(const gng_model* model, const gng_rate* rate,
                                    gng_rate_method method, double t,
                                    const gng_profile_options* profile,
                                    const gng_graph_options* graph,
                                    const gng_integrator_options* opts, gng_profile** out);
GNG_API gng_status gng_profile_size(const gng_profile* pr, size_t* out);
GNG_API gng_status gng_profile_point(const gng_profile* pr, size_t i, double* x, double* value);
GNG_API gng_status gng_profile_nondiff_count(const gng_profile* pr, size_t* nondiff,
                                             size_t* certified);
GNG_API gng_status gng_profile_csv(const gng_profile* pr, char** out);
/* Nondiff points with witness gradients and the certified subset. */
GNG_API gng_status gng_profile_json(const gng_profile* pr, char** out);
GNG_API gng_status gng_profile_linf(const gng_profile* a, const gng_profile* b, double* out);
GNG_API gng_status gng_profiles_svg(const gng_profile* const* profiles, size_t n, const char* title,
                                    char** out);
GNG_API void gng_profile_free(gng_profile* pr);

/* ---- analysis -------------------------------------------------------- */

GNG_API gng_status gng_linearization_threshold(const gng_model* model, const gng_rate* rate,
                                               double x0, double* out);
GNG_API gng_status gng_slope_zero_crossing(const gng_model* model, const gng_rate* rate, double x0,
                                           double t_lo, double t_hi, double dx,
                                           const gng_integrator_options* opts, double* out);
GNG_API gng_status gng_overhang_onset(const gng_model* model, const gng_rate* rate, double t_lo,
                                      double t_hi, double tol, const gng_graph_options* graph,
                                      const gng_integrator_options* opts, double* out);
GNG_API gng_status gng_heating_report_json(const gng_model* model, const gng_rate* rate,
                                           const gng_integrator_options* opts, char** out);

typedef enum gng_region_kind {
  GNG_REGION_WHOLE = 0,
  GNG_REGION_UPPER_RIGHT = 1,
  GNG_REGION_LOWER_LEFT = 2
} gng_region_kind;

/* holds may be NULL. */
GNG_API gng_status gng_order_certificate_json(const gng_model* model, gng_region_kind kind,
                                              double y, double q, size_t samples, int* holds,
                                              char** out);

typedef struct gng_loop gng_loop;

GNG_API gng_status gng_rotating_loop(const gng_model* model, double m1, double m2, double e_frac,
                                     gng_loop** out);
/* Uses the first qualifying pair of neighbouring stationary points. */
GNG_API gng_status gng_rotating_loop_auto(const gng_model* model, double e_frac, gng_loop** out);
GNG_API gng_status gng_loop_bounds(const gng_loop* loop, double* a, double* b, double* energy);
GNG_API gng_status gng_loop_size(const gng_loop* loop, size_t* out);
/* upper != 0 selects p = h(x), otherwise p = g(x). */
GNG_API gng_status gng_loop_point(const gng_loop* loop, int upper, size_t i, double* x, double* p);
/* Period of the orbit through (x, p); also recorded in the loop's JSON. */
GNG_API gng_status gng_loop_period(const gng_model* model, gng_loop* loop, double x, double p,
                                   const gng_integrator_options* opts, double* out);
GNG_API gng_status gng_loop_json(const gng_loop* loop, char** out);
GNG_API gng_status gng_loop_csv(const gng_loop* loop, char** out);
GNG_API void gng_loop_free(gng_loop* loop);

GNG_API gng_status gng_recovery_constants(double alpha, double* z, double* kappa);

/* Timeline over the given times; recovery != 0 adds the recovery constants
 * and reference time (CurieWeiss beta = h = 0 with entropy data only). */
GNG_API gng_status gng_scan_json(const gng_model* model, const gng_rate* rate, const double* times,
                                 size_t n_times, int recovery, const gng_graph_options* graph,
                                 const gng_profile_options* profile,
                                 const gng_integrator_options* opts, char** out);

/* ---- scenarios ------------------------------------------------------- */

typedef struct gng_scenario gng_scenario;

GNG_API gng_status gng_scenario_load(const char* path, gng_scenario** out);
GNG_API gng_status gng_scenario_parse(const char* text, const char* source_name,
                                      gng_scenario** out);
/* Borrowed pointer, valid while the scenario lives. */
GNG_API const char* gng_scenario_name(const gng_scenario* sc);
/* Writes the configured artifacts (relative paths under base_dir when it is
 * non-NULL and non-empty); report may be NULL. */
GNG_API gng_status gng_scenario_run(const gng_scenario* sc, const char* base_dir, char** report);
GNG_API void gng_scenario_free(gng_scenario* sc);

#ifdef __cplusplus
}
#endif

#endif /* GNGLAB_GNGLAB_H */
