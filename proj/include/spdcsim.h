#ifndef SPDCSIM_H
#define SPDCSIM_H

/* C interface to the two-photon interference simulator.
 *
 * All entry points return spdcsim_status; on any non-OK status a
 * human-readable message is available from spdcsim_last_error() until the
 * next call on the same thread. Strings returned through char** out
 * parameters are heap-allocated and must be released with
 * spdcsim_string_free().
 */

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum spdcsim_status {
    SPDCSIM_OK = 0,
    SPDCSIM_ERR_CONFIG = 1,    /* bad input: JSON, schema, values, paths */
    SPDCSIM_ERR_NUMERICAL = 2, /* evaluation failure (non-finite result) */
    SPDCSIM_ERR_CANCEL = 3     /* cancellation battery expectation violated */
} spdcsim_status;

typedef struct spdcsim_config spdcsim_config;

const char* spdcsim_version(void);

/* Message for the most recent failure on the calling thread ("" if none). */
const char* spdcsim_last_error(void);

/* Warnings emitted by the most recent run on the calling thread, one per
 * line ("" if none). */
const char* spdcsim_last_warnings(void);

/* The built-in measurement scenario: 405 nm pump, 1.5 mm crystal, 200 mm
 * focal length, 6 mm mirror radius, 4 mm aperture radius 330 mm downstream,
 * infinite-aperture model, 201 delay samples, automatic grid order. */
spdcsim_status spdcsim_config_default(spdcsim_config** out);

/* Parses a config JSON object or a metadata sidecar produced by a run.
 * source_name seeds error messages (conventionally the file path). */
spdcsim_status spdcsim_config_parse(const char* json_text,
                                    const char* source_name,
                                    spdcsim_config** out);

/* Reads the file and parses it as spdcsim_config_parse does. */
spdcsim_status spdcsim_config_parse_file(const char* path,
                                         spdcsim_config** out);

void spdcsim_config_free(spdcsim_config* cfg);

/* Renders the config as schema JSON (the format parse accepts). */
spdcsim_status spdcsim_config_render(const spdcsim_config* cfg,
                                     char** json_out);

/* Field overrides used by command-line flags. model is "finite" or
 * "infinite"; order is "auto" or a decimal integer >= 8. */
spdcsim_status spdcsim_config_set_model(spdcsim_config* cfg,
                                        const char* model);
spdcsim_status spdcsim_config_set_output(spdcsim_config* cfg,
                                         const char* prefix);
spdcsim_status spdcsim_config_set_grid_order(spdcsim_config* cfg,
                                             const char* order);

/* 1 if the config embeds a sweep section, else 0. */
int spdcsim_config_has_sweep(const spdcsim_config* cfg);

/* Computes one coincidence-dip curve and writes <output>_dip.csv plus the
 * <output>_dip_meta.json sidecar. files_out (optional) receives the written
 * paths, one per line. */
spdcsim_status spdcsim_run_dip(const spdcsim_config* cfg, char** files_out);

/* Sweeps mode (n, m) over pv_count surface peak-to-valley amplitudes in
 * micrometers; writes one curve CSV per amplitude, a summary CSV and a
 * metadata sidecar. */
spdcsim_status spdcsim_run_sweep(const spdcsim_config* cfg, int n, int m,
                                 const double* pv_um, size_t pv_count,
                                 char** files_out);

/* Same, but taking the mode and amplitudes from the config's embedded
 * sweep section. */
spdcsim_status spdcsim_run_sweep_embedded(const spdcsim_config* cfg,
                                          char** files_out);

/* Runs the fixed parity battery (five even modes expected to cancel, four
 * odd modes expected to distort) at 0.5 um peak-to-valley on the
 * infinite-aperture kernel. report_out (optional) receives the pass/fail
 * table, which is also written to <output>_cancel.txt. Returns
 * SPDCSIM_ERR_CANCEL if any expectation is conclusively violated. */
spdcsim_status spdcsim_run_cancel_test(const spdcsim_config* cfg,
                                       char** report_out);

/* Integer coefficient table of the radial polynomials for order n: all
 * azimuthal orders of matching parity when all_m is nonzero, otherwise the
 * single given m. */
spdcsim_status spdcsim_zernike_table(int n, int m, int all_m,
                                     char** text_out);

void spdcsim_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* SPDCSIM_H */
