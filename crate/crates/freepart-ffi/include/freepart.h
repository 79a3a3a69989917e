/* C interface to the freepart exact free-probability library. */

#ifndef FREEPART_H
#define FREEPART_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes shared by every entry point.
typedef enum FpStatus {
  // Success.
  FP_STATUS_OK = 0,
  // Invalid argument (null pointer, zero denominator, bad data).
  FP_STATUS_ERR_INVALID = 1,
  // The input describes an inconsistent model (e.g. nonpositive total mass).
  FP_STATUS_ERR_CONFIG = 2,
  // A size cap or truncation bound was exceeded.
  FP_STATUS_ERR_RESOURCE = 3,
  // The caller's output buffer is too small.
  FP_STATUS_ERR_BUFFER = 4,
  // An internal invariant failed.
  FP_STATUS_ERR_INTERNAL = 5,
} FpStatus;

// Opaque test function on a space.
typedef struct FpFunction FpFunction;

// Opaque jump-size measure.
typedef struct FpJumpMeasure FpJumpMeasure;

// Opaque discrete spatial measure.
typedef struct FpSpace FpSpace;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Create a discrete space from cell names and `num[i]/den[i]` masses.
//
// # Safety
// `names` must point to `n_cells` valid NUL-terminated UTF-8 strings, and
// `mass_num`/`mass_den` to `n_cells` integers; `out` must be a valid pointer.
enum FpStatus fp_space_new(const char *const *names,
                           const long long *mass_num,
                           const long long *mass_den,
                           uintptr_t n_cells,
                           struct FpSpace **out);

// Destroy a space handle. Null is a no-op.
//
// # Safety
// `sp` must be null or a pointer from `fp_space_new`, not yet freed.
void fp_space_free(struct FpSpace *sp);

// Create a jump-size measure from atoms `size[i] -> mass[i]` (rationals as
// num/den pairs).
//
// # Safety
// The four arrays must hold `n_atoms` integers each; `out` must be valid.
enum FpStatus fp_jump_measure_new(const long long *size_num,
                                  const long long *size_den,
                                  const long long *mass_num,
                                  const long long *mass_den,
                                  uintptr_t n_atoms,
                                  struct FpJumpMeasure **out);

// The unit point mass at jump size 1 (the unmarked / free Poisson case).
//
// # Safety
// `out` must be a valid pointer.
enum FpStatus fp_jump_measure_delta_one(struct FpJumpMeasure **out);

// Destroy a jump-measure handle. Null is a no-op.
//
// # Safety
// `jm` must be null or an unfreed pointer from a jump-measure constructor.
void fp_jump_measure_free(struct FpJumpMeasure *jm);

// Create a test function with value `num[i]/den[i]` on cell `i` of `sp`.
//
// # Safety
// `sp` must be a live space handle; `num`/`den` must hold one entry per cell.
enum FpStatus fp_function_new(const struct FpSpace *sp,
                              const long long *num,
                              const long long *den,
                              uintptr_t n_values,
                              struct FpFunction **out);

// Destroy a function handle. Null is a no-op.
//
// # Safety
// `f` must be null or an unfreed pointer from `fp_function_new`.
void fp_function_free(struct FpFunction *f);

// Exact mixed moment of `n_particles` free particles in the vacuum-type
// state; `centered != 0` subtracts each particle's mean first. The result
// is written to `buf` as `"p/q"`.
//
// # Safety
// `sp` must be live; `jm` may be null (treated as a point mass at 1);
// `word` must hold `word_len` live function handles; `buf` must have room
// for `buf_len` bytes.
enum FpStatus fp_fixed_n_trace(const struct FpSpace *sp,
                               const struct FpJumpMeasure *jm,
                               uint64_t n_particles,
                               const struct FpFunction *const *word,
                               uintptr_t word_len,
                               int32_t centered,
                               char *buf,
                               uintptr_t buf_len);

// Exact mixed moment with a Poisson(`alpha_num/alpha_den`) particle number.
//
// # Safety
// Same contract as `fp_fixed_n_trace`; `alpha_den` must be nonzero.
enum FpStatus fp_poissonized_trace(const struct FpSpace *sp,
                                   const struct FpJumpMeasure *jm,
                                   long long alpha_num,
                                   long long alpha_den,
                                   const struct FpFunction *const *word,
                                   uintptr_t word_len,
                                   int32_t centered,
                                   char *buf,
                                   uintptr_t buf_len);

// Moment of the limiting free Poisson / free Levy white noise.
//
// # Safety
// Same pointer contract as `fp_fixed_n_trace`.
enum FpStatus fp_levy_moment(const struct FpSpace *sp,
                             const struct FpJumpMeasure *jm,
                             const struct FpFunction *const *word,
                             uintptr_t word_len,
                             int32_t centered,
                             char *buf,
                             uintptr_t buf_len);

// Free cumulant of the limiting white noise for the given word.
//
// # Safety
// Same pointer contract as `fp_fixed_n_trace`.
enum FpStatus fp_levy_free_cumulant(const struct FpSpace *sp,
                                    const struct FpJumpMeasure *jm,
                                    const struct FpFunction *const *word,
                                    uintptr_t word_len,
                                    char *buf,
                                    uintptr_t buf_len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FREEPART_H */
