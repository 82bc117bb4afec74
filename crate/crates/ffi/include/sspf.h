/* C ABI for the sspf library. Generated; do not edit. */

#ifndef SSPF_H
#define SSPF_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Wall mask bits for field construction.
 */
#define SSPF_WALL_LEFT 1

#define SSPF_WALL_RIGHT 2

#define SSPF_WALL_BOTTOM 4

#define SSPF_WALL_TOP 8

/**
 * Outcome of a call. Anything but `Ok` leaves a message for
 * `sspf_last_error`.
 */
typedef enum SspfStatus {
  SspfStatus_Ok = 0,
  SspfStatus_NullPointer = 1,
  SspfStatus_InvalidArgument = 2,
  SspfStatus_InvalidGas = 3,
  SspfStatus_InvalidState = 4,
  SspfStatus_Precondition = 5,
  SspfStatus_InconsistentIc = 6,
  SspfStatus_Degenerate = 7,
  SspfStatus_Format = 8,
  SspfStatus_Io = 9,
  SspfStatus_Panic = 10,
} SspfStatus;

/**
 * Local equation type at a node.
 */
typedef enum SspfTypeTag {
  SspfTypeTag_Elliptic = 0,
  SspfTypeTag_Parabolic = 1,
  SspfTypeTag_Hyperbolic = 2,
} SspfTypeTag;

/**
 * Verdict of the maximum-principle check.
 */
typedef enum SspfVerdict {
  SspfVerdict_MaxOnBoundary = 0,
  SspfVerdict_UniformlySubElliptic = 1,
  SspfVerdict_ViolationCandidate = 2,
} SspfVerdict;

/**
 * Opaque field handle.
 */
typedef struct SspfField SspfField;

/**
 * Opaque gas handle.
 */
typedef struct SspfGas SspfGas;

/**
 * Solver options. Zero or negative fields select the built-in default;
 * pass NULL to `sspf_solve` for all defaults.
 */
typedef struct SspfSolverOptions {
  /**
   * Newton iteration cap; 0 for the default.
   */
  uint64_t max_newton_iters;
  /**
   * Residual max-norm target; <= 0 for the default gauge-scaled value.
   */
  double residual_tol;
  /**
   * Frozen-coefficient warmup iterations; < 0 for the default.
   */
  int64_t picard_warmup_iters;
  /**
   * Lower clamp for c^2 during iteration; <= 0 for the default.
   */
  double c2_floor;
  /**
   * Pseudo-Mach damping threshold; <= 0 for the default.
   */
  double l_guard;
} SspfSolverOptions;

/**
 * Summary of a solve, filled by `sspf_solve`.
 */
typedef struct SspfSolveInfo {
  /**
   * 1 when the residual target was reached.
   */
  int32_t converged;
  uint64_t iterations;
  double final_residual;
  double residual_tol;
  double max_l_interior;
  uint64_t l_guard_hits;
  uint64_t c2_clamped_nodes;
  /**
   * 1 when every unknown stayed strictly below L = 1.
   */
  int32_t uniformly_elliptic;
} SspfSolveInfo;

/**
 * Summary of a maximum-principle check, filled by `sspf_verify`.
 */
typedef struct SspfVerifyInfo {
  enum SspfVerdict verdict;
  double max_interior_l2;
  double max_boundary_value;
  double residual_inf;
  double tol;
  double delta;
  /**
   * Argmax node of L^2 + b, folded back into the input grid.
   */
  uint64_t argmax_i1;
  uint64_t argmax_i2;
  double argmax_value;
} SspfVerifyInfo;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Version of the library as a static C string.
 */
const char *sspf_version(void);

/**
 * Message of the last failing call on this thread. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *sspf_last_error(void);

/**
 * Creates a gas handle. `bernoulli_a` is the additive Bernoulli
 * constant; 0 is the natural normalization.
 *
 * # Safety
 * `out` must be a valid pointer; on `Ok` it receives a handle to release
 * with `sspf_gas_free`.
 */
enum SspfStatus sspf_gas_new(double gamma,
                             double c0,
                             double rho0,
                             double bernoulli_a,
                             struct SspfGas **out);

/**
 * Releases a gas handle. NULL is a no-op.
 *
 * # Safety
 * `gas` must be NULL or a handle from `sspf_gas_new` not yet freed.
 */
void sspf_gas_free(struct SspfGas *gas);

/**
 * Creates a chi field from nodal values in node order (second axis
 * fastest). `walls_mask` is a combination of the `SSPF_WALL_*` bits.
 *
 * # Safety
 * `values` must point to `n1 * n2` doubles; `out` must be valid and on
 * `Ok` receives a handle to release with `sspf_field_free`.
 */
enum SspfStatus sspf_field_create(double origin1,
                                  double origin2,
                                  double spacing1,
                                  double spacing2,
                                  uint64_t n1,
                                  uint64_t n2,
                                  uint32_t walls_mask,
                                  const double *values,
                                  struct SspfField **out);

/**
 * Samples the constant-velocity solution chi = v.xi - |xi|^2/2 + a_prime.
 *
 * # Safety
 * `gas` must be a live gas handle; `out` must be valid and on `Ok`
 * receives a handle to release with `sspf_field_free`.
 */
enum SspfStatus sspf_field_uniform(const struct SspfGas *gas,
                                   double v1,
                                   double v2,
                                   double a_prime,
                                   double origin1,
                                   double origin2,
                                   double spacing1,
                                   double spacing2,
                                   uint64_t n1,
                                   uint64_t n2,
                                   uint32_t walls_mask,
                                   struct SspfField **out);

/**
 * Releases a field handle. NULL is a no-op.
 *
 * # Safety
 * `field` must be NULL or a live field handle not yet freed.
 */
void sspf_field_free(struct SspfField *field);

/**
 * Grid dimensions of a field.
 *
 * # Safety
 * All pointers must be valid.
 */
enum SspfStatus sspf_field_dims(const struct SspfField *field, uint64_t *n1, uint64_t *n2);

/**
 * Copies the nodal values into `buf` in node order.
 *
 * # Safety
 * `buf` must point to at least `len` doubles; `len` must be at least the
 * node count of the field.
 */
enum SspfStatus sspf_field_copy_values(const struct SspfField *field, double *buf, uint64_t len);

/**
 * Value at node (i1, i2).
 *
 * # Safety
 * All pointers must be valid.
 */
enum SspfStatus sspf_field_value(const struct SspfField *field,
                                 uint64_t i1,
                                 uint64_t i2,
                                 double *out);

/**
 * Max-norm of the interior residual of a chi field.
 *
 * # Safety
 * All pointers must be valid handles or outputs.
 */
enum SspfStatus sspf_residual_inf_norm(const struct SspfField *field,
                                       const struct SspfGas *gas,
                                       double *out);

/**
 * Pseudo-Mach number and type tag at a node, with the default sonic
 * band. Boundary nodes use one-sided gradients.
 *
 * # Safety
 * All pointers must be valid; `l` and `tag` may each be NULL when the
 * caller does not need them.
 */
enum SspfStatus sspf_point_mach(const struct SspfField *field,
                                const struct SspfGas *gas,
                                uint64_t i1,
                                uint64_t i2,
                                double *l,
                                enum SspfTypeTag *tag);

/**
 * Solves the interior chi problem with the boundary field's grid, walls
 * and Dirichlet-edge values.
 *
 * # Safety
 * `boundary` and `gas` must be live handles; `options` may be NULL for
 * defaults; `info` may be NULL. On `Ok`, `out` receives a handle to
 * release with `sspf_field_free`.
 */
enum SspfStatus sspf_solve(const struct SspfField *boundary,
                           const struct SspfGas *gas,
                           const struct SspfSolverOptions *options,
                           struct SspfField **out,
                           struct SspfSolveInfo *info);

/**
 * Checks the maximum principle for L^2 + barrier on a chi field.
 * `c_hat <= 0` selects the automatic gauge (largest computed sound speed
 * times 1 + 1e-12); `k_ver <= 0` selects the default tolerance constant.
 *
 * # Safety
 * `field` and `gas` must be live handles; `info` must be valid.
 */
enum SspfStatus sspf_verify(const struct SspfField *field,
                            const struct SspfGas *gas,
                            double delta,
                            double c_hat,
                            double k_ver,
                            struct SspfVerifyInfo *info);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SSPF_H */
