/* C ABI of the lowercs library (compressed sensing on lower sets).
 *
 * Objects cross the boundary as opaque handles released by the matching
 * *_free call. Fallible functions return LcsStatus and write results
 * through out-pointers; lcs_last_error retrieves the most recent error
 * message of the calling thread.
 *
 * Kept in sync with crates/lowercs-ffi/src/lib.rs by hand.
 */

#ifndef LOWERCS_H
#define LOWERCS_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum LcsStatus {
  LCS_OK = 0,
  LCS_NULL_POINTER = 1,
  LCS_INVALID_ARGUMENT = 2,
  LCS_NUMERIC_ERROR = 3,
  LCS_PANIC = 4,
} LcsStatus;

/* Basis kinds: 0 = Legendre (uniform measure), 1 = Chebyshev (arcsine). */
#define LCS_KIND_LEGENDRE 0u
#define LCS_KIND_CHEBYSHEV 1u

/* Threshold modes for lcs_lower_iht. */
#define LCS_THRESHOLD_EXACT 0u
#define LCS_THRESHOLD_GREEDY 1u
#define LCS_THRESHOLD_AUTO 2u

/* Support families for lcs_empirical_rip. */
#define LCS_RIP_STANDARD 0u
#define LCS_RIP_LOWER 1u
#define LCS_RIP_K_CONSTRAINED 2u

typedef struct LcsIndexSet LcsIndexSet;
typedef struct LcsSampleSet LcsSampleSet;
typedef struct LcsSensingSystem LcsSensingSystem;
typedef struct LcsRecoveryReport LcsRecoveryReport;

/* Black-box target function evaluated at a d-dimensional point. */
typedef double (*LcsTargetFn)(const double *point, size_t dim, void *ctx);

/* Copies the last error message into buf (NUL terminated, truncated to
 * len); returns the full message length. buf may be NULL to query. */
size_t lcs_last_error(char *buf, size_t len);

/* Index sets. */
LcsStatus lcs_hyperbolic_cross(size_t s, size_t d, LcsIndexSet **out);
LcsStatus lcs_index_set_from_text(const char *text, LcsIndexSet **out);
LcsStatus lcs_index_set_to_text(const LcsIndexSet *set, char *buf, size_t len,
                                size_t *needed);
LcsStatus lcs_index_set_len(const LcsIndexSet *set, size_t *out);
LcsStatus lcs_index_set_dim(const LcsIndexSet *set, size_t *out);
LcsStatus lcs_index_set_is_lower(const LcsIndexSet *set, int32_t *out);
void lcs_index_set_free(LcsIndexSet *set);

/* Weights and combinatorial quantities. */
LcsStatus lcs_weight(uint32_t kind, const uint32_t *degrees, size_t dim,
                     double *out);
LcsStatus lcs_sup_norm_weights(uint32_t kind, const LcsIndexSet *set,
                               double *buf, size_t len);
LcsStatus lcs_k_of_set(uint32_t kind, const LcsIndexSet *set, double *out);
LcsStatus lcs_k_of_s(uint32_t kind, size_t s, size_t d, size_t budget,
                     double *out);
LcsStatus lcs_theta(uint32_t kind, const LcsIndexSet *set, double *out);

/* Sufficient sample count of the RIP guarantees; pass Theta^2*s for the
 * standard bound and K(s) for the lower one. */
LcsStatus lcs_sample_bound(double driver, double delta, double gamma,
                           size_t n, double *out);

/* Sampling and system assembly. */
LcsStatus lcs_draw_samples(uint32_t kind, size_t d, size_t m, uint64_t seed,
                           LcsSampleSet **out);
void lcs_sample_set_free(LcsSampleSet *samples);
LcsStatus lcs_build_system(uint32_t kind, const LcsIndexSet *set,
                           const LcsSampleSet *samples, LcsTargetFn g,
                           void *ctx, double eta, LcsSensingSystem **out);
void lcs_system_free(LcsSensingSystem *system);

/* Recovery. weight_pow: 0 unit, p >= 1 the p-th power of the sup-norm
 * weights. */
LcsStatus lcs_weighted_bpdn(const LcsSensingSystem *system,
                            uint32_t weight_pow, double tolerance,
                            size_t max_iterations, LcsRecoveryReport **out);
LcsStatus lcs_lower_iht(const LcsSensingSystem *system, size_t s,
                        uint32_t mode, size_t max_iterations,
                        double tolerance, LcsRecoveryReport **out);
void lcs_report_free(LcsRecoveryReport *report);

/* Report accessors. */
LcsStatus lcs_report_len(const LcsRecoveryReport *report, size_t *out);
LcsStatus lcs_report_coefficients(const LcsRecoveryReport *report,
                                  double *buf, size_t len);
LcsStatus lcs_report_stats(const LcsRecoveryReport *report,
                           double *residual_norm, double *objective,
                           size_t *iterations, int32_t *converged);

/* Diagnostics. */
LcsStatus lcs_empirical_rip(const LcsSensingSystem *system, size_t s,
                            uint32_t mode, size_t budget, double *delta_hat,
                            size_t *supports_examined);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* LOWERCS_H */
