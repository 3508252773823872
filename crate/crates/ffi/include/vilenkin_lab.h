#ifndef VILENKIN_LAB_H
#define VILENKIN_LAB_H

/* Generated by cbindgen from crates/ffi/src; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum VlKernelKind {
  VL_KERNEL_KIND_DIRICHLET = 0,
  VL_KERNEL_KIND_FEJER = 1,
  /**
   * Closed form of `K_{M_j}`; `n` is `j`.
   */
  VL_KERNEL_KIND_FEJER_CLOSED = 2,
  VL_KERNEL_KIND_NORLUND = 3,
  VL_KERNEL_KIND_TAIL = 4,
} VlKernelKind;

typedef enum VlStatus {
  VL_STATUS_OK = 0,
  VL_STATUS_NULL_POINTER = 1,
  VL_STATUS_INVALID_GROUP = 2,
  VL_STATUS_OUT_OF_RANGE = 3,
  VL_STATUS_LENGTH_MISMATCH = 4,
  VL_STATUS_INVALID_WEIGHTS = 5,
  VL_STATUS_INVALID_ATOM = 6,
  VL_STATUS_INVALID_VALUE = 7,
  VL_STATUS_INTERNAL = 8,
} VlStatus;

/**
 * Opaque group handle.
 */
typedef struct VlGroup VlGroup;

/**
 * Opaque weight-sequence handle.
 */
typedef struct VlWeights VlWeights;

typedef struct VlComplex {
  double re;
  double im;
} VlComplex;

typedef struct VlQuasiNorms {
  double lp;
  double weak_lp;
  double hp;
} VlQuasiNorms;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Length in bytes, without the terminating nul, of the last error message
 * on this thread; 0 if the last call succeeded.
 */
size_t vl_last_error_length(void);

/**
 * Copies the last error message into `buf` (nul-terminated, truncated to
 * `len - 1` bytes). Returns the number of bytes written without the nul.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t vl_last_error_message(char *buf, size_t len);

/**
 * Creates the level-`level` group from the first `level` of `count`
 * radices.
 *
 * # Safety
 * `radices` must point to `count` values and `out` to a writable handle
 * slot.
 */
enum VlStatus vl_group_new(const size_t *radices, size_t count, size_t level, struct VlGroup **out);

/**
 * # Safety
 * `group` must be null or a handle from [`vl_group_new`] not yet freed.
 */
void vl_group_free(struct VlGroup *group);

/**
 * `M_N`, or 0 for a null handle.
 *
 * # Safety
 * `group` must be null or a live handle.
 */
size_t vl_group_size(const struct VlGroup *group);

/**
 * `N`, or 0 for a null handle.
 *
 * # Safety
 * `group` must be null or a live handle.
 */
size_t vl_group_level(const struct VlGroup *group);

/**
 * Unit weights `q_0..q_{n_max-1}`.
 *
 * # Safety
 * `out` must point to a writable handle slot.
 */
enum VlStatus vl_weights_constant(size_t n_max, struct VlWeights **out);

/**
 * Iterated-logarithm weights `log^(beta)(k^alpha)`.
 *
 * # Safety
 * `out` must point to a writable handle slot.
 */
enum VlStatus vl_weights_log(double alpha, uint32_t beta, size_t n_max, struct VlWeights **out);

/**
 * Caller-supplied weights; rejected unless finite, `q_0 > 0` and
 * non-decreasing.
 *
 * # Safety
 * `q` must point to `len` values and `out` to a writable handle slot.
 */
enum VlStatus vl_weights_custom(const double *q, size_t len, struct VlWeights **out);

/**
 * # Safety
 * `weights` must be null or a handle not yet freed.
 */
void vl_weights_free(struct VlWeights *weights);

/**
 * Vilenkin-Fourier coefficients of `values` (both arrays of length `M_N`).
 *
 * # Safety
 * `values` and `coeffs` must point to `len` elements; `group` must be live.
 */
enum VlStatus vl_forward_transform(const struct VlGroup *group,
                                   const struct VlComplex *values,
                                   struct VlComplex *coeffs,
                                   size_t len);

/**
 * Synthesizes cell values from coefficients.
 *
 * # Safety
 * `coeffs` and `values` must point to `len` elements; `group` must be live.
 */
enum VlStatus vl_inverse_transform(const struct VlGroup *group,
                                   const struct VlComplex *coeffs,
                                   struct VlComplex *values,
                                   size_t len);

/**
 * Evaluates a kernel on every cell. `weights` is needed for `Norlund` and
 * `Tail`, `n0` only for `Tail`.
 *
 * # Safety
 * `values` must point to `len` elements; handles must be live or null.
 */
enum VlStatus vl_kernel(const struct VlGroup *group,
                        enum VlKernelKind kind,
                        size_t n,
                        size_t n0,
                        const struct VlWeights *weights,
                        struct VlComplex *values,
                        size_t len);

/**
 * The Nörlund mean `t_n f`.
 *
 * # Safety
 * `values` and `mean` must point to `len` elements; handles must be live.
 */
enum VlStatus vl_norlund_mean(const struct VlGroup *group,
                              const struct VlWeights *weights,
                              const struct VlComplex *values,
                              size_t n,
                              struct VlComplex *mean,
                              size_t len);

/**
 * `L_p`, weak-`L_p` and `H_p` quasi-norms of `values`, `0 < p <= 1`.
 *
 * # Safety
 * `values` must point to `len` elements; `out` must be writable.
 */
enum VlStatus vl_quasi_norms(const struct VlGroup *group,
                             const struct VlComplex *values,
                             size_t len,
                             double p,
                             struct VlQuasiNorms *out);

/**
 * Draws the seeded `p`-atom supported on `I_{support_level}(0)`.
 *
 * # Safety
 * `values` must point to `len` elements; `group` must be live.
 */
enum VlStatus vl_make_atom(const struct VlGroup *group,
                           size_t support_level,
                           double p,
                           uint64_t seed,
                           struct VlComplex *values,
                           size_t len);

/**
 * Checks the `p`-atom conditions; `VL_STATUS_INVALID_ATOM` if they fail.
 *
 * # Safety
 * `values` must point to `len` elements; `group` must be live.
 */
enum VlStatus vl_check_atom(const struct VlGroup *group,
                            const struct VlComplex *values,
                            size_t len,
                            double p,
                            size_t support_level);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* VILENKIN_LAB_H */
