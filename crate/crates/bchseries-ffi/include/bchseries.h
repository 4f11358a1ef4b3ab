#ifndef BCHSERIES_H
#define BCHSERIES_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Caller-supplied dimensions above this are rejected before any buffer is
 * touched.
 */
#define BCH_MAX_DIM 256

/**
 * Status codes returned by every entry point.
 */
typedef enum {
  /**
   * Success.
   */
  BCH_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  BCH_STATUS_NULL_ARGUMENT = 1,
  /**
   * Sizes, orders, or values outside the documented domain.
   */
  BCH_STATUS_INVALID_INPUT = 2,
  /**
   * A sinh factor sat on a singularity that no fallback could remove.
   */
  BCH_STATUS_SINGULAR_INPUT = 3,
  /**
   * Defective matrix, branch cut, or other numerical failure.
   */
  BCH_STATUS_NUMERICAL_FAILURE = 4,
  /**
   * The call panicked; state is unchanged.
   */
  BCH_STATUS_PANIC = 5,
} BchStatus;

/**
 * Opaque truncation engine.
 */
typedef struct BchEngineHandle BchEngineHandle;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the most recent failure on this thread. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *bch_last_error_message(void);

/**
 * Library version as a static C string.
 */
const char *bch_version(void);

/**
 * Create an engine with explicit thresholds: `delta` guards sinh factors
 * against (removable) singularities, `epsilon` scales the perturbation of
 * the degeneracy fallback. Returns null on invalid parameters.
 */
BchEngineHandle *bch_engine_new(double delta, double epsilon);

/**
 * Create an engine with the default thresholds.
 */
BchEngineHandle *bch_engine_new_default(void);

/**
 * Destroy an engine created by [`bch_engine_new`]. Null is ignored.
 *
 * # Safety
 * `engine` must be a pointer previously returned by an engine constructor
 * and not freed since.
 */
void bch_engine_free(BchEngineHandle *engine);

/**
 * Truncated series `Z_N` of `log(e^A e^{2B} e^A)`.
 *
 * Inputs: row-major `dim * dim` matrices (`a_im`/`b_im` may be null).
 * Outputs: `z_re`/`z_im` (`dim * dim`, `z_im` may be null to drop the
 * imaginary part), optional `term_norms` (length `order`) and an optional
 * fallback-evaluation counter.
 *
 * # Safety
 * All non-null pointers must reference buffers of the documented lengths.
 */
BchStatus bch_truncated(const BchEngineHandle *engine,
                        uintptr_t dim,
                        const double *a_re,
                        const double *a_im,
                        const double *b_re,
                        const double *b_im,
                        uintptr_t order,
                        double *z_re,
                        double *z_im,
                        double *term_norms,
                        uintptr_t *fallback_count);

/**
 * Direct evaluation of `log(e^A e^{2B} e^A)` through the matrix exponential
 * and principal logarithm; the slow reference for [`bch_truncated`].
 *
 * # Safety
 * All non-null pointers must reference buffers of the documented lengths.
 */
BchStatus bch_direct_log(uintptr_t dim,
                         const double *a_re,
                         const double *a_im,
                         const double *b_re,
                         const double *b_im,
                         double *z_re,
                         double *z_im);

/**
 * Order-`order` scalar series coefficient on one eigenvalue tuple
 * (`order + 1` values). Degenerate tuples are an error here; the matrix
 * engine, not the caller, owns the fallback policy.
 *
 * # Safety
 * `eigs_re` (and `eigs_im` when non-null) must hold `order + 1` values.
 */
BchStatus bch_g_coefficient(const BchEngineHandle *engine,
                            uintptr_t order,
                            const double *eigs_re,
                            const double *eigs_im,
                            double *out_re,
                            double *out_im);

/**
 * Taylor coefficients of tanh at 0, `t_0..t_{k_max}`, as doubles.
 *
 * # Safety
 * `out` must hold `k_max + 1` doubles.
 */
BchStatus bch_tanh_coefficients(uintptr_t k_max, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BCHSERIES_H */
