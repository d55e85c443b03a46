#ifndef RESKIT_H
#define RESKIT_H

/* Generated with cbindgen:0.29.4 */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Node family selectors for [`reskit_stability_lab_csv`].
#define RESKIT_FAMILY_EQUIDISTANT 0

#define RESKIT_FAMILY_CHEBYSHEV 1

// Oversampling selectors for [`reskit_stability_lab_csv`].
#define RESKIT_OVERSAMPLING_NONE 0

#define RESKIT_OVERSAMPLING_PI 1

#define RESKIT_OVERSAMPLING_MSQUARED 2

// Result codes. The non-zero codes 2 to 4 match the command-line exit codes.
typedef enum ReskitStatus {
  RESKIT_STATUS_OK = 0,
  RESKIT_STATUS_INVALID_ARGUMENT = 1,
  RESKIT_STATUS_CONFIG_INVALID = 2,
  RESKIT_STATUS_SOLVER_FAILURE = 3,
  RESKIT_STATUS_IO = 4,
  RESKIT_STATUS_PANIC = 5,
  RESKIT_STATUS_NULL_POINTER = 6,
} ReskitStatus;

// Certificate produced by [`reskit_solve`].
typedef struct ReskitCertificate ReskitCertificate;

// Parsed run configuration.
typedef struct ReskitConfig ReskitConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failure on this thread, or null. The pointer stays
// valid until the next failing call on the same thread.
const char *reskit_last_error(void);

// Library version as a static NUL-terminated string.
const char *reskit_version(void);

// Parses a JSON run configuration. On success `*out` receives a handle
// to release with [`reskit_config_free`].
//
// # Safety
// `json` must be a valid NUL-terminated string and `out` a valid pointer.
enum ReskitStatus reskit_config_from_json(const char *json, struct ReskitConfig **out);

// Releases a configuration. Null is ignored.
//
// # Safety
// `cfg` must come from [`reskit_config_from_json`] and not be used again.
void reskit_config_free(struct ReskitConfig *cfg);

// Runs the configured method. Nothing is written to disk; the output
// block of the configuration is ignored.
//
// # Safety
// `cfg` must be a live configuration handle and `out` a valid pointer.
enum ReskitStatus reskit_solve(const struct ReskitConfig *cfg, struct ReskitCertificate **out);

// Releases a certificate. Null is ignored.
//
// # Safety
// `cert` must come from [`reskit_solve`] and not be used again.
void reskit_certificate_free(struct ReskitCertificate *cert);

// A-posteriori bound. `*max_principle` is 1 when the value bounds the
// sup-norm error, 0 when it is a residual only.
//
// # Safety
// All pointers must be valid.
enum ReskitStatus reskit_certificate_bound(const struct ReskitCertificate *cert,
                                           double *value,
                                           int32_t *max_principle);

// Combined fine-grid residual.
//
// # Safety
// All pointers must be valid.
enum ReskitStatus reskit_certificate_combined_residual(const struct ReskitCertificate *cert,
                                                       double *out);

// Trial space dimension.
//
// # Safety
// All pointers must be valid.
enum ReskitStatus reskit_certificate_dimension(const struct ReskitCertificate *cert,
                                               uintptr_t *out);

// Fine-grid sup error against the manufactured solution.
//
// # Safety
// All pointers must be valid.
enum ReskitStatus reskit_certificate_true_error(const struct ReskitCertificate *cert, double *out);

// Certificate as pretty-printed JSON.
//
// # Safety
// All pointers must be valid; release `*out` with [`reskit_string_free`].
enum ReskitStatus reskit_certificate_to_json(const struct ReskitCertificate *cert, char **out);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not be used again.
void reskit_string_free(char *s);

// Lebesgue constant of `n` distinct nodes in `[-1, 1]`, maximised over
// `fine_points` equidistant points.
//
// # Safety
// `nodes` must point to `n` doubles and `out` must be valid.
enum ReskitStatus reskit_lebesgue_constant(const double *nodes,
                                           uintptr_t n,
                                           uintptr_t fine_points,
                                           double *out);

// Stability-lab table as CSV text.
//
// # Safety
// `orders` must point to `n_orders` values and `out` must be valid;
// release `*out` with [`reskit_string_free`].
enum ReskitStatus reskit_stability_lab_csv(uint32_t family,
                                           uint32_t oversampling,
                                           const uintptr_t *orders,
                                           uintptr_t n_orders,
                                           char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RESKIT_H */
