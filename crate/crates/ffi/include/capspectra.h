#ifndef CAPSPECTRA_H
#define CAPSPECTRA_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CsStatus {
  CS_STATUS_OK = 0,
  CS_STATUS_NULL_POINTER = 1,
  CS_STATUS_INVALID_ARGUMENT = 2,
  CS_STATUS_CONFIG = 3,
  CS_STATUS_NUMERICAL = 4,
  CS_STATUS_IO = 5,
  CS_STATUS_PANIC = 6,
} CsStatus;

/**
 * Opaque scenario configuration.
 */
typedef struct CsConfig CsConfig;

/**
 * Opaque completed run.
 */
typedef struct CsRun CsRun;

/**
 * Scalar results of a run.
 */
typedef struct CsTotals {
  double p2;
  double p1;
  double p0;
  double norm2_final;
  /**
   * NaN when the run did not propagate the one-particle density.
   */
  double residual_final;
  double neg_content;
  double extent;
  double duration;
  bool duration_reached;
} CsTotals;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Description of the last failure on this thread; empty if none. The pointer
 * stays valid until the next failing call on this thread.
 */
const char *cs_last_error_message(void);

/**
 * Library version, a static string.
 */
const char *cs_version(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library and not yet freed.
 */
void cs_string_free(char *s);

/**
 * Built-in scenario by name (`scattering`, `scattering-double`, `photo03`,
 * `photo10`).
 *
 * # Safety
 * `name` must be a NUL-terminated string; `out` must be valid for writes.
 */
enum CsStatus cs_config_preset(const char *name, struct CsConfig **out);

/**
 * Parse and validate a TOML scenario.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be valid for writes.
 */
enum CsStatus cs_config_from_toml(const char *text, struct CsConfig **out);

/**
 * # Safety
 * `cfg` must be null or a handle from this library that has not been freed.
 */
void cs_config_free(struct CsConfig *cfg);

/**
 * Replace the absorber-strength ladder.
 *
 * # Safety
 * `cfg` must be a live handle; `values` must point to `len` doubles.
 */
enum CsStatus cs_config_set_gamma0(struct CsConfig *cfg, const double *values, size_t len);

/**
 * Set the time step and the maximum propagation time.
 *
 * # Safety
 * `cfg` must be a live handle.
 */
enum CsStatus cs_config_set_time(struct CsConfig *cfg, double tau, double t_max);

/**
 * The configuration as TOML; release with [`cs_string_free`]. Null on a
 * null handle.
 *
 * # Safety
 * `cfg` must be null or a live handle.
 */
char *cs_config_to_toml(const struct CsConfig *cfg);

/**
 * SHA-256 of the configuration (hex); release with [`cs_string_free`].
 *
 * # Safety
 * `cfg` must be null or a live handle.
 */
char *cs_config_hash(const struct CsConfig *cfg);

/**
 * Lowest eigenvalue of the one-body Hamiltonian on the configured grid.
 *
 * # Safety
 * `cfg` must be a live handle; `out` must be valid for writes.
 */
enum CsStatus cs_config_ground_energy(const struct CsConfig *cfg, double *out);

/**
 * Run the scenario at one absorber strength. Blocks until done.
 *
 * # Safety
 * `cfg` must be a live handle; `out` must be valid for writes.
 */
enum CsStatus cs_run(const struct CsConfig *cfg, double gamma0, struct CsRun **out);

/**
 * # Safety
 * `run` must be null or a handle from this library that has not been freed.
 */
void cs_run_free(struct CsRun *run);

/**
 * # Safety
 * `run` must be a live handle; `out` must be valid for writes.
 */
enum CsStatus cs_run_totals(const struct CsRun *run, struct CsTotals *out);

/**
 * Number of energy samples in the run's spectra; 0 on a null handle.
 *
 * # Safety
 * `run` must be null or a live handle.
 */
size_t cs_run_spectrum_len(const struct CsRun *run);

/**
 * Copy the spectra into caller buffers of exactly `len` doubles each.
 *
 * # Safety
 * `run` must be a live handle; each buffer must hold `len` doubles.
 */
enum CsStatus cs_run_spectrum(const struct CsRun *run,
                              double *energy,
                              double *dp2_de,
                              double *dp1_de,
                              size_t len);

/**
 * Write `spectrum.csv` and `metadata.json` into `dir`.
 *
 * # Safety
 * `run` must be a live handle; `dir` a NUL-terminated path.
 */
enum CsStatus cs_run_write(const struct CsRun *run, const char *dir);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CAPSPECTRA_H */
