#ifndef RATTLEBACK_H
#define RATTLEBACK_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by every fallible function.
typedef enum RbStatus {
  RB_STATUS_OK = 0,
  RB_STATUS_NULL_POINTER = 1,
  // Parameters or configuration rejected.
  RB_STATUS_INVALID_INPUT = 2,
  // Integration or continuation failed its accuracy checks.
  RB_STATUS_NUMERICAL = 3,
  RB_STATUS_UTF8 = 4,
  RB_STATUS_PANIC = 5,
} RbStatus;

typedef enum RbVerdict {
  RB_VERDICT_ANALYTIC_NONINTEGRABLE = 0,
  RB_VERDICT_MEROMORPHIC_NONINTEGRABLE = 1,
  RB_VERDICT_INCONCLUSIVE = 2,
} RbVerdict;

// Body parameters.
typedef struct RbParams RbParams;

// Certification result.
typedef struct RbReport RbReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failure on this thread. The pointer stays valid
// until the next failing call on the same thread.
const char *rb_last_error_message(void);

// Body from principal moments, tilt `delta`, semi-axes and `m`, `g`.
//
// # Safety
// `out` must be a valid pointer to writable storage for one handle.
enum RbStatus rb_params_new(double i1,
                            double i2,
                            double i3,
                            double delta,
                            const double *b,
                            double m,
                            double g,
                            struct RbParams **out);

// Body from the JSON parameter object accepted by the command-line tool.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum RbStatus rb_params_from_json(const char *json, struct RbParams **out);

// # Safety
// `p` must come from `rb_params_new`/`rb_params_from_json` or be null.
void rb_params_free(struct RbParams *p);

// Integrates from `omega0`, `gamma0` (three entries each) up to `t_end`
// with default tolerances. Writes the final `(ω, γ)` to `state_out` (six
// entries) and the relative energy drift to `h_drift` if non-null.
//
// # Safety
// All non-null pointers must reference arrays of the stated length.
enum RbStatus rb_simulate(const struct RbParams *params,
                          const double *omega0,
                          const double *gamma0,
                          double t_end,
                          double *state_out,
                          double *h_drift);

// Runs the certification pipeline at energy `h = h_re + i h_im` with
// default numerics.
//
// # Safety
// `params` must be a live handle; `out` must be writable.
enum RbStatus rb_certify(const struct RbParams *params,
                         double h_re,
                         double h_im,
                         struct RbReport **out);

// # Safety
// `report` must be a live handle; `out` must be writable.
enum RbStatus rb_report_verdict(const struct RbReport *report, enum RbVerdict *out);

// Copies the three exponents into `re` and `im` (three entries each).
//
// # Safety
// `report` must be a live handle; `re`, `im` must hold three doubles.
enum RbStatus rb_report_lambda(const struct RbReport *report, double *re, double *im);

// Full report as a JSON string, released with `rb_string_free`. Returns
// null on failure.
//
// # Safety
// `report` must be a live handle or null.
char *rb_report_json(const struct RbReport *report);

// # Safety
// `report` must come from `rb_certify` or be null.
void rb_report_free(struct RbReport *report);

// # Safety
// `s` must come from this library or be null.
void rb_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RATTLEBACK_H */
