/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef CVSTEER_H
#define CVSTEER_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call.
typedef enum {
  CVS_STATUS_OK = 0,
  CVS_STATUS_NULL_POINTER = 1,
  CVS_STATUS_INVALID_ARGUMENT = 2,
  CVS_STATUS_PARSE = 3,
  CVS_STATUS_NOT_SYMMETRIC = 4,
  CVS_STATUS_NON_FINITE = 5,
  CVS_STATUS_UNPHYSICAL = 6,
  CVS_STATUS_NOT_POSITIVE_DEFINITE = 7,
  CVS_STATUS_SINGULAR = 8,
  CVS_STATUS_NOT_SYMPLECTIC = 9,
  CVS_STATUS_INVALID_STANDARD_FORM = 10,
  CVS_STATUS_NO_CONVERGENCE = 11,
  CVS_STATUS_DEGENERATE_VARIANCE = 12,
  CVS_STATUS_INSUFFICIENT_SAMPLES = 13,
  CVS_STATUS_INVALID_MIXTURE = 14,
  CVS_STATUS_PANIC = 15,
} CvsStatus;

typedef enum {
  CVS_DIRECTION_A_TO_B = 0,
  CVS_DIRECTION_B_TO_A = 1,
} CvsDirection;

// Opaque covariance-matrix handle.
typedef struct CvsCovMatrix CvsCovMatrix;

// Opaque state handle for sampling: a Gaussian state with first moments
// or a Gaussian mixture.
typedef struct CvsState CvsState;

typedef struct {
  double det_a;
  double det_b;
  double det_c;
  double det_sigma;
} CvsLocalInvariants;

typedef struct {
  double a;
  double b;
  double c1;
  double c2;
} CvsStandardForm;

typedef struct {
  double det_m_b;
  double min_eigenvalue;
  bool violated_algebraic;
  bool violated_spectral;
} CvsWisemanTest;

typedef struct {
  double det_m_b;
  double det_m_a;
  double g_a_to_b;
  double g_b_to_a;
  double reid_product_as_given;
  bool reid_violated;
  bool wiseman_violated_a_to_b;
  double key_rate_bound;
  double optimal_key_rate_bound;
} CvsSteeringReport;

// Chart coordinates of a 2×2 symplectic matrix
// `[[1/((1-uv)w), v/((1-uv)w)], [u w, w]]`.
typedef struct {
  double u;
  double v;
  double w;
} CvsSymplecticParams;

typedef struct {
  double min_value;
  CvsSymplecticParams argmin_a;
  CvsSymplecticParams argmin_b;
  size_t iterations;
  size_t restarts_used;
  bool converged;
  double det_m_b;
  double gap;
} CvsOptimizationResult;

typedef struct {
  double inf_product;
  double min_product;
  double inf_product_sigma;
  double min_product_sigma;
  double gap_sigma;
  size_t samples;
  size_t bins;
} CvsEmpiricalProducts;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the most recent failure on the calling thread, or NULL. The
// pointer stays valid until the next failing call on this thread.
const char *cvs_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *cvs_version(void);

// Validates 16 row-major entries and returns a new handle in `*out`.
//
// # Safety
// `entries` must point to 16 readable doubles; `out` must be writable.
CvsStatus cvs_cov_matrix_new(const double *entries, CvsCovMatrix **out_cm);

// Parses a Gaussian or mixture state file; for a mixture the handle holds
// the mixture's covariance matrix.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
CvsStatus cvs_cov_matrix_from_json(const char *json, CvsCovMatrix **out_cm);

// Releases a handle. NULL is ignored.
//
// # Safety
// `cm` must come from this library and not be used afterwards.
void cvs_cov_matrix_free(CvsCovMatrix *cm);

// Copies the 16 entries, row-major, into `entries`.
//
// # Safety
// `cm` must be a live handle; `entries` must have room for 16 doubles.
CvsStatus cvs_cov_matrix_entries(const CvsCovMatrix *cm, double *entries);

// # Safety
// `out` must be writable.
CvsStatus cvs_vacuum(CvsCovMatrix **out_cm);

// Two-mode squeezed vacuum in standard form.
//
// # Safety
// `out` must be writable.
CvsStatus cvs_tmsv(double r, CvsCovMatrix **out_cm);

// Two-mode squeezed vacuum plus `diag(n_a, n_a, n_b, n_b)`.
//
// # Safety
// `out` must be writable.
CvsStatus cvs_noisy_tmsv(double r, double n_a, double n_b, CvsCovMatrix **out_cm);

// Seeded random bona fide covariance matrix.
//
// # Safety
// `out` must be writable.
CvsStatus cvs_random_cm(uint64_t seed, double max_thermal, CvsCovMatrix **out_cm);

// Symplectic eigenvalues, `nu_plus ≥ nu_minus`.
//
// # Safety
// `cm` must be a live handle; outputs must be writable.
CvsStatus cvs_symplectic_eigenvalues(const CvsCovMatrix *cm, double *nu_plus, double *nu_minus);

// Smallest eigenvalue of `σ + iΩ`; non-negative for physical states.
//
// # Safety
// `cm` must be a live handle; `value` must be writable.
CvsStatus cvs_min_uncertainty_eigenvalue(const CvsCovMatrix *cm, double *value);

// # Safety
// `cm` must be a live handle; `inv` must be writable.
CvsStatus cvs_local_invariants(const CvsCovMatrix *cm, CvsLocalInvariants *inv);

// Standard-form parameters `(a, b, c1, c2)` with `c1 ≥ |c2|`.
//
// # Safety
// `cm` must be a live handle; `sf` must be writable.
CvsStatus cvs_standard_form(const CvsCovMatrix *cm, CvsStandardForm *sf);

// `M_σ^B = B - Cᵀ A⁻¹ C`, row-major into `m` (4 doubles).
//
// # Safety
// `cm` must be a live handle; `m` must have room for 4 doubles.
CvsStatus cvs_schur_complement_b(const CvsCovMatrix *cm, double *m);

// Gaussian steering measure in the given direction.
//
// # Safety
// `cm` must be a live handle; `value` must be writable.
CvsStatus cvs_gaussian_steering(const CvsCovMatrix *cm, CvsDirection direction, double *value);

// Reid product of inference variances in the current basis.
//
// # Safety
// `cm` must be a live handle; `value` must be writable.
CvsStatus cvs_reid_product(const CvsCovMatrix *cm, double *value);

// Algebraic and spectral forms of the Gaussian steering criterion.
//
// # Safety
// `cm` must be a live handle; `test` must be writable.
CvsStatus cvs_wiseman_test(const CvsCovMatrix *cm, CvsWisemanTest *test);

// Key-rate bound from the Reid product in the current basis.
//
// # Safety
// `cm` must be a live handle; `value` must be writable.
CvsStatus cvs_key_rate_bound(const CvsCovMatrix *cm, double *value);

// `max{0, s + ln 2 - 1}`.
double cvs_optimal_key_rate_bound(double s_lower);

// # Safety
// `cm` must be a live handle; `report` must be writable.
CvsStatus cvs_full_report(const CvsCovMatrix *cm, CvsSteeringReport *report);

// Closed-form minimizing parameters for the standard form `(a, b, c1, c2)`.
//
// # Safety
// `pa` and `pb` must be writable.
CvsStatus cvs_optimal_params(CvsStandardForm sf,
                             double v_b,
                             double w_a,
                             double w_b,
                             CvsSymplecticParams *pa,
                             CvsSymplecticParams *pb);

// Multi-start minimization of the Reid product. Returns
// `CvsStatus::NoConvergence` if the closed-form minimum is not reached.
//
// # Safety
// `cm` must be a live handle; `result` must be writable.
CvsStatus cvs_minimize_reid(const CvsCovMatrix *cm,
                            size_t restarts,
                            uint64_t seed,
                            CvsOptimizationResult *result);

// Gaussian state with covariance `cm` and first moments `mean` (4 doubles,
// NULL for zero).
//
// # Safety
// `cm` must be a live handle; `mean` NULL or 4 readable doubles; `out`
// writable.
CvsStatus cvs_state_gaussian(const CvsCovMatrix *cm, const double *mean, CvsState **out_state);

// State from a Gaussian or mixture JSON document.
//
// # Safety
// `json` must be NUL-terminated; `out` writable.
CvsStatus cvs_state_from_json(const char *json, CvsState **out_state);

// # Safety
// `state` must come from this library and not be used afterwards.
void cvs_state_free(CvsState *state);

// Monte Carlo estimate of the inference-variance products with bootstrap
// error bars; `samples` per quadrature pair.
//
// # Safety
// `state` must be a live handle; `result` writable.
CvsStatus cvs_empirical_products(const CvsState *state,
                                 size_t samples,
                                 uint64_t seed,
                                 size_t bins,
                                 CvsEmpiricalProducts *result);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CVSTEER_H */
