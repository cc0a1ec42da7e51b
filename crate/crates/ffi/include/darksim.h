#ifndef DARKSIM_H
#define DARKSIM_H

/* Generated by cbindgen from darksim-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by fallible calls.
 */
typedef enum DsStatus {
  DS_STATUS_OK = 0,
  DS_STATUS_INVALID_ARGUMENT = 1,
  DS_STATUS_CONFIG_ERROR = 2,
  DS_STATUS_NUMERICAL_ERROR = 3,
  DS_STATUS_IO_ERROR = 4,
  DS_STATUS_INTERNAL_ERROR = 5,
} DsStatus;

/**
 * Opaque configuration handle.
 */
typedef struct DsConfig DsConfig;

/**
 * Opaque scenario-report handle (owns its key/value storage).
 */
typedef struct DsReport DsReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *darksim_version(void);

/**
 * Copy the last error message on this thread into `buf` (truncated to
 * `len − 1` bytes, always NUL-terminated). Returns the full message length.
 *
 * # Safety
 * `buf` must point to at least `len` writable bytes, or be null (in which
 * case only the length is returned).
 */
uintptr_t darksim_last_error(char *buf, uintptr_t len);

/**
 * New empty configuration.
 */
struct DsConfig *darksim_config_new(void);

/**
 * Load a configuration file. Returns null on error (see darksim_last_error).
 *
 * # Safety
 * `path` must be a valid NUL-terminated string or null.
 */
struct DsConfig *darksim_config_load(const char *path);

/**
 * Apply a `key=value` override.
 *
 * # Safety
 * `cfg` must be a live handle from this library; `assignment` a valid
 * NUL-terminated string.
 */
enum DsStatus darksim_config_set(struct DsConfig *cfg, const char *assignment);

/**
 * # Safety
 * `cfg` must come from darksim_config_new/load and not be freed twice.
 */
void darksim_config_free(struct DsConfig *cfg);

/**
 * Run a scenario. `out_dir` may be null to skip writing artifacts;
 * `has_seed` gates whether `seed` is applied. Returns null on error.
 *
 * # Safety
 * `cfg` must be a live handle; `scenario` and (if non-null) `out_dir` valid
 * NUL-terminated strings.
 */
struct DsReport *darksim_run_scenario(const struct DsConfig *cfg,
                                      const char *scenario,
                                      bool has_seed,
                                      uint64_t seed,
                                      const char *out_dir);

/**
 * Number of summary entries in a report.
 *
 * # Safety
 * `report` must be a live handle.
 */
uintptr_t darksim_report_len(const struct DsReport *report);

/**
 * Key of the idx-th entry; owned by the report. Null when out of range.
 *
 * # Safety
 * `report` must be a live handle.
 */
const char *darksim_report_key(const struct DsReport *report, uintptr_t idx);

/**
 * Numeric value for a summary key. Non-numeric entries report NaN.
 *
 * # Safety
 * `report` must be a live handle, `key` a valid NUL-terminated string and
 * `value` a writable f64 slot.
 */
enum DsStatus darksim_report_get(const struct DsReport *report, const char *key, double *value);

/**
 * String value for a summary key; owned by the report.
 *
 * # Safety
 * As for darksim_report_get.
 */
const char *darksim_report_get_str(const struct DsReport *report, const char *key);

/**
 * # Safety
 * `report` must come from darksim_run_scenario and not be freed twice.
 */
void darksim_report_free(struct DsReport *report);

/**
 * Protected-subspace finder over raw buffers.
 *
 * `h_re`/`h_im` and `jz_re`/`jz_im` are row-major dim×dim matrices. On
 * success, up to `*dark_count` orthonormal dark vectors are written into
 * `dark_out` (interleaved re, im; vector k occupies entries
 * [2·k·dim, 2·(k+1)·dim)) and `*dark_count` holds the subspace dimension.
 * `tol ≤ 0` selects the default 1e-9 × matrix scale.
 *
 * # Safety
 * All matrix pointers must reference `dim²` readable f64s, `dark_out`
 * `2·dim·capacity` writable f64s where `capacity = *dark_count` on entry,
 * and `dark_count` a writable usize.
 */
enum DsStatus darksim_find_protected(uintptr_t dim,
                                     const double *h_re,
                                     const double *h_im,
                                     const double *jz_re,
                                     const double *jz_im,
                                     double tol,
                                     double *dark_out,
                                     uintptr_t *dark_count);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DARKSIM_H */
