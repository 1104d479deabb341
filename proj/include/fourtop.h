/* fourtop — neural topology optimization with Fourier-band length-scale
 * control. C interface of the shared library: opaque handles, status codes,
 * and a thread-local error message for the last failing call. */

#ifndef FOURTOP_H
#define FOURTOP_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ftop_status {
  FTOP_OK = 0,
  FTOP_ERROR = 1,            /* unexpected internal failure */
  FTOP_INVALID_ARGUMENT = 2, /* bad key, value or precondition */
  FTOP_SOLVER_FAILURE = 3,   /* stiffness factorization failed */
  FTOP_NUMERIC_ERROR = 4,    /* non-finite values or failed iteration */
  FTOP_IO_ERROR = 5
} ftop_status;

typedef struct ftop_config ftop_config;
typedef struct ftop_result ftop_result;

const char* ftop_version(void);

/* Message describing this thread's last failing fourtop call. */
const char* ftop_last_error(void);

/* --- configuration ------------------------------------------------------ */

ftop_status ftop_config_create(ftop_config** out);
void ftop_config_destroy(ftop_config* cfg);

/* Applies a `key = value` config file (see README for the key set). */
ftop_status ftop_config_load_file(ftop_config* cfg, const char* path);

/* Assigns one dotted key; unknown keys and bad values are rejected. */
ftop_status ftop_config_set(ftop_config* cfg, const char* key,
                            const char* value);

/* Copies the current value of a key into buf (NUL-terminated). */
ftop_status ftop_config_get(const ftop_config* cfg, const char* key, char* buf,
                            size_t cap);

/* --- experiments --------------------------------------------------------- */

/* Runs the configured experiment; artifacts are written into the config's
 * out_dir. On success *out owns the result summary. */
ftop_status ftop_run(const ftop_config* cfg, ftop_result** out);

void ftop_result_destroy(ftop_result* r);

/* 0 = converged, 2 = epoch budget exhausted without convergence. */
int ftop_result_exit_code(const ftop_result* r);

ftop_status ftop_result_scalars(const ftop_result* r, double* compliance,
                                double* vol_or_mass_fraction,
                                double* gray_fraction, int* epochs);

ftop_status ftop_result_feature_sizes(const ftop_result* r, double* min_t,
                                      double* median_t, double* max_t);

size_t ftop_result_history_rows(const ftop_result* r);

/* cols[7] = epoch, loss, compliance, volume_or_mass_fraction, gray_fraction,
 * alpha, p */
ftop_status ftop_result_history_row(const ftop_result* r, size_t row,
                                    double cols[7]);

ftop_status ftop_result_out_dir(const ftop_result* r, char* buf, size_t cap);

#ifdef __cplusplus
}
#endif

#endif /* FOURTOP_H */
