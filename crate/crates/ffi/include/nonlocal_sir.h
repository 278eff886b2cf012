#ifndef NONLOCAL_SIR_H
#define NONLOCAL_SIR_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum NsStatus {
  NS_STATUS_OK = 0,
  NS_STATUS_INVALID_ARGUMENT = 1,
  NS_STATUS_PRECONDITION = 2,
  NS_STATUS_UNKNOWN_METHOD = 3,
  NS_STATUS_PROPERTY_VIOLATION = 4,
  NS_STATUS_IO = 5,
  NS_STATUS_CONFIG = 6,
  NS_STATUS_NULL_POINTER = 7,
  NS_STATUS_PANIC = 8,
} NsStatus;

typedef enum NsSpecies {
  NS_SPECIES_S = 0,
  NS_SPECIES_I = 1,
  NS_SPECIES_R = 2,
} NsSpecies;

/**
 * Opaque solver handle.
 */
typedef struct NsSolver NsSolver;

/**
 * Outcome of the property check for the last step. Flags are 1 when the
 * property holds.
 */
typedef struct NsReport {
  size_t step;
  uint8_t d1;
  uint8_t d2;
  uint8_t d3;
  uint8_t d4;
  double worst_negative;
  double conservation_drift;
} NsReport;

/**
 * Step-size bounds, see `ns_solver_bounds`.
 */
typedef struct NsBounds {
  double adaptive;
  double improved;
  double pessimistic;
  double rk_scaled;
} NsBounds;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *ns_last_error(void);

/**
 * Solver with the default configuration.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum NsStatus ns_solver_new_default(struct NsSolver **out);

/**
 * Solver from a TOML configuration document.
 *
 * # Safety
 * `toml` must be a NUL-terminated string and `out` a valid pointer.
 */
enum NsStatus ns_solver_new(const char *toml, struct NsSolver **out);

/**
 * # Safety
 * `solver` must come from `ns_solver_new*` and not be used afterwards. Null is ignored.
 */
void ns_solver_free(struct NsSolver *solver);

/**
 * Grid dimensions; field buffers hold `p1 * p2` values, row-major in the first index.
 *
 * # Safety
 * All pointers must be valid.
 */
enum NsStatus ns_solver_shape(const struct NsSolver *solver, size_t *p1, size_t *p2);

/**
 * # Safety
 * All pointers must be valid.
 */
enum NsStatus ns_solver_time(const struct NsSolver *solver, double *t);

/**
 * Copy one species into `buf`, which must hold at least `p1 * p2` values.
 *
 * # Safety
 * `buf` must be writable for `len` doubles.
 */
enum NsStatus ns_solver_field(const struct NsSolver *solver,
                              enum NsSpecies species,
                              double *buf,
                              size_t len);

/**
 * Advance one step of size `tau` and check the discrete properties.
 * A failed check still advances the state and returns `PropertyViolation`.
 *
 * # Safety
 * `solver` must be valid; `report` may be null.
 */
enum NsStatus ns_solver_step(struct NsSolver *solver, double tau, struct NsReport *report);

/**
 * Bounds for the configured stepper. `adaptive` uses the current state,
 * the others the initial one.
 *
 * # Safety
 * All pointers must be valid.
 */
enum NsStatus ns_solver_bounds(const struct NsSolver *solver, struct NsBounds *out);

/**
 * Absolute error of a disk rule on the Gaussian test integral.
 *
 * # Safety
 * `kind` must be a NUL-terminated string and `err` a valid pointer.
 */
enum NsStatus ns_cubature_error(const char *kind,
                                size_t n,
                                double delta,
                                double sigma,
                                double *err);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NONLOCAL_SIR_H */
