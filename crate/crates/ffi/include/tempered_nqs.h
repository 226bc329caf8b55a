#ifndef TEMPERED_NQS_H
#define TEMPERED_NQS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum TnqsStatus {
  TNQS_STATUS_OK = 0,
  TNQS_STATUS_NULL_POINTER = 1,
  TNQS_STATUS_INVALID_UTF8 = 2,
  TNQS_STATUS_OUT_OF_RANGE = 3,
  TNQS_STATUS_CONFIG = 4,
  TNQS_STATUS_NUMERIC = 5,
  TNQS_STATUS_CAPACITY = 6,
  TNQS_STATUS_SOLVER = 7,
  TNQS_STATUS_CONTROLLER = 8,
  TNQS_STATUS_CONVERGENCE = 9,
  TNQS_STATUS_IO = 10,
  TNQS_STATUS_PARSE = 11,
  TNQS_STATUS_PANIC = 12,
} TnqsStatus;

/**
 * An experiment configuration.
 */
typedef struct TnqsConfig TnqsConfig;

/**
 * The records and summary of a finished experiment.
 */
typedef struct TnqsResult TnqsResult;

/**
 * Lowest levels of an exact spectrum.
 */
typedef struct TnqsSpectrum TnqsSpectrum;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null if none.
 * The pointer stays valid until the next failing call on this thread.
 */
const char *tnqs_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *tnqs_version(void);

/**
 * Releases a string returned by this library.
 */
void tnqs_string_free(char *s);

/**
 * Parses a TOML experiment config.
 */
enum TnqsStatus tnqs_config_from_toml(const char *toml, struct TnqsConfig **out);

/**
 * Loads a TOML experiment config from a file.
 */
enum TnqsStatus tnqs_config_load(const char *path, struct TnqsConfig **out);

/**
 * Serializes a config back to TOML; free the string with [`tnqs_string_free`].
 */
enum TnqsStatus tnqs_config_to_toml(const struct TnqsConfig *config, char **out);

enum TnqsStatus tnqs_config_set_seed(struct TnqsConfig *config, uint64_t seed);

enum TnqsStatus tnqs_config_set_runs(struct TnqsConfig *config, size_t runs);

enum TnqsStatus tnqs_config_set_total_updates(struct TnqsConfig *config, size_t updates);

void tnqs_config_free(struct TnqsConfig *config);

/**
 * Runs every run of the experiment; blocks until all finish.
 */
enum TnqsStatus tnqs_run_experiment(const struct TnqsConfig *config, struct TnqsResult **out);

/**
 * Writes the on-disk output tree of a finished experiment into `dir`.
 */
enum TnqsStatus tnqs_result_write(const struct TnqsConfig *config,
                                  const struct TnqsResult *result,
                                  const char *dir);

enum TnqsStatus tnqs_result_run_count(const struct TnqsResult *result, size_t *out);

/**
 * Number of runs that met the success rule.
 */
enum TnqsStatus tnqs_result_success_count(const struct TnqsResult *result, size_t *out);

/**
 * Success flag of run `index` and, when it succeeded, the update at which it did.
 */
enum TnqsStatus tnqs_result_run_success(const struct TnqsResult *result,
                                        size_t index,
                                        bool *succeeded,
                                        size_t *step);

/**
 * Final energy of the zero-temperature replica of run `index`; NaN if unknown.
 */
enum TnqsStatus tnqs_result_final_energy(const struct TnqsResult *result,
                                         size_t index,
                                         double *out);

/**
 * Summary as JSON; free the string with [`tnqs_string_free`].
 */
enum TnqsStatus tnqs_result_summary_json(const struct TnqsResult *result, char **out);

void tnqs_result_free(struct TnqsResult *result);

/**
 * Lowest `levels` energies of the Precipice problem in the symmetric sector.
 */
enum TnqsStatus tnqs_precipice_spectrum(size_t n,
                                        double s,
                                        size_t levels,
                                        struct TnqsSpectrum **out);

/**
 * Lowest `levels` energies of the J1-J2 model with `weight` up spins.
 */
enum TnqsStatus tnqs_j1j2_spectrum(size_t lx,
                                   size_t ly,
                                   double j1,
                                   double j2,
                                   bool periodic,
                                   size_t weight,
                                   size_t levels,
                                   struct TnqsSpectrum **out);

enum TnqsStatus tnqs_spectrum_len(const struct TnqsSpectrum *spectrum, size_t *out);

/**
 * Sector dimension the spectrum was computed in.
 */
enum TnqsStatus tnqs_spectrum_dimension(const struct TnqsSpectrum *spectrum, size_t *out);

enum TnqsStatus tnqs_spectrum_eigenvalue(const struct TnqsSpectrum *spectrum,
                                         size_t index,
                                         double *out);

void tnqs_spectrum_free(struct TnqsSpectrum *spectrum);

/**
 * Replica-exchange acceptance probability; infinite `beta` marks the
 * zero-temperature slot.
 */
enum TnqsStatus tnqs_swap_probability(double beta_i,
                                      double beta_j,
                                      double energy_i,
                                      double energy_j,
                                      double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TEMPERED_NQS_H */
