#ifndef QUON_QUON_H
#define QUON_QUON_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define QUON_API __declspec(dllexport)
#else
#define QUON_API __attribute__((visibility("default")))
#endif

typedef enum quon_status {
  QUON_OK = 0,
  QUON_INVALID_ARGUMENT = 1,
  QUON_DIMENSION_MISMATCH = 2,
  QUON_SINGULAR = 3,
  QUON_DOMAIN = 4,
  QUON_CONVERGENCE = 5,
  QUON_CONDITIONING = 6,
  QUON_IO = 7,
  QUON_CONFIG = 8,
  QUON_INTERNAL = 99
} quon_status;

typedef struct quon_complex {
  double re;
  double im;
} quon_complex;

typedef struct quon_family quon_family;
typedef struct quon_quadrature quon_quadrature;
typedef struct quon_position quon_position;

/* Message of the last failed call on this thread; never NULL. */
QUON_API const char* quon_last_error(void);
QUON_API const char* quon_version(void);
QUON_API void quon_string_free(char* s);

/* Scalar q-calculus. */
QUON_API quon_status quon_beta_sq(double q, int n, double* out);
QUON_API quon_status quon_q_factorial(double q, int n, double* out);
QUON_API quon_status quon_log_number_eigenvalue(double q, int n, double* out);

/* Fock-space families. */
QUON_API quon_status quon_family_identity(double q, int K, quon_family** out);
QUON_API quon_status quon_family_rank_one(double q, int K, const quon_complex* u,
                                          const quon_complex* v, int len, quon_complex alpha,
                                          quon_family** out);
/* Subset configuration: arrays of (index, weight) per subset. */
QUON_API quon_status quon_family_subsets(double q, int K, const int* idx0, const quon_complex* w0,
                                         int n0, const int* idx1, const quon_complex* w1, int n1,
                                         const int* idx2, const quon_complex* w2, int n2,
                                         quon_complex alpha, quon_family** out);
QUON_API void quon_family_free(quon_family* family);
QUON_API int quon_family_dim(const quon_family* family);
QUON_API int quon_family_k_safe(const quon_family* family);
/* Copies phi_n (which = 0) or Psi_n (which = 1) into out[0..dim). */
QUON_API quon_status quon_family_vector(const quon_family* family, int which, int n,
                                        quon_complex* out, int len);
/* Row-major K x K matrix of a (which = 0) or b (which = 1). */
QUON_API quon_status quon_family_operator(const quon_family* family, int which, quon_complex* out,
                                          int len);

typedef struct quon_family_report {
  double qmutator;
  double biorthogonality;
  double ladder;
  double number;
  double spectra;
  double theta_closed_form;
  double theta_conjugacy;
  double theta_inverse;
  double theta_min_eigenvalue;
} quon_family_report;

QUON_API quon_status quon_family_check(const quon_family* family, quon_family_report* out);

typedef struct quon_bicoherent_report {
  double norm_const;
  double eigen_a;
  double eigen_b_dagger;
  quon_complex pairing;
  quon_complex uncertainty_product;
  double predicted_uncertainty;
  double rho;
} quon_bicoherent_report;

QUON_API quon_status quon_bicoherent(const quon_family* family, quon_complex z,
                                     quon_bicoherent_report* out);

/* Moment-matched radial quadrature. */
QUON_API quon_status quon_quadrature_solve(double q, double rho, int k_mom, quon_quadrature** out);
QUON_API void quon_quadrature_free(quon_quadrature* quad);
QUON_API int quon_quadrature_size(const quon_quadrature* quad);
QUON_API quon_status quon_quadrature_nodes(const quon_quadrature* quad, double* r, double* w,
                                           int len);
QUON_API int quon_quadrature_feasible(const quon_quadrature* quad);
QUON_API double quon_quadrature_max_residual(const quon_quadrature* quad);
QUON_API quon_status quon_resolution_check(const quon_family* family, const quon_quadrature* quad,
                                           int n_theta, const quon_complex* f,
                                           const quon_complex* g, int len, quon_complex* out);

/* Position representation. */
QUON_API quon_status quon_position_create(double q, double gamma, int n_max, quon_position** out);
QUON_API void quon_position_free(quon_position* pos);
QUON_API quon_status quon_position_ladder(const quon_position* pos, double* out);
/* Relative error of the norm formula for n <= n_max and whether L_n <= (n+1)^2. */
QUON_API quon_status quon_position_norm_formula(const quon_position* pos, double* max_relative,
                                                int* bound_holds);
/* Samples phi_n (which = 0) or Psi_n (which = 1) on the default grid (4096 points). */
QUON_API int quon_position_grid_size(const quon_position* pos);
QUON_API quon_status quon_position_sample(const quon_position* pos, int which, int n, double* x,
                                          quon_complex* values, int len);

/* Runs a JSON experiment config. Returns QUON_OK and sets *exit_code to 0
   (all pass) or 1 (tolerance failure). Config errors return QUON_CONFIG.
   seed < 0 keeps the config seed. *summary_json (if non-NULL) receives the
   summary; free it with quon_string_free. */
QUON_API quon_status quon_run_config(const char* config_json, const char* out_dir, int64_t seed,
                                     double tolerance_scale, int* exit_code, char** summary_json);

typedef void (*quon_criterion_callback)(int id, const char* name, int passed, const char* detail,
                                        void* user);

QUON_API int quon_criterion_count(void);
/* Runs criterion id (1-based), or all criteria when id == 0. Returns the
   number of failed criteria, or -1 on error. */
QUON_API int quon_selftest(int id, quon_criterion_callback callback, void* user);

#ifdef __cplusplus
}
#endif

#endif
