/* SPDX-License-Identifier: Apache-2.0 */
#ifndef SPINMET_H
#define SPINMET_H

/*
 * C interface to the spin-ensemble metrology engine.
 *
 * Usage: build a spinmet_config (defaults mirror the optimized protocol at
 * N = 10), set keys, run it, read the result as CSV/JSON or write it to a
 * file. All functions return a status code; spinmet_last_error() describes
 * the most recent failure on the calling thread.
 */

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum spinmet_status {
  SPINMET_OK = 0,
  SPINMET_ERR_INVALID_ARG = 1,
  SPINMET_ERR_CONFIG = 2,
  SPINMET_ERR_NUMERIC = 3,
  SPINMET_ERR_IO = 4
} spinmet_status;

typedef struct spinmet_config spinmet_config;
typedef struct spinmet_result spinmet_result;

/* configuration */
spinmet_config* spinmet_config_create(void);
void spinmet_config_free(spinmet_config* cfg);
spinmet_status spinmet_config_set(spinmet_config* cfg, const char* key,
                                  const char* value);
/* copies the value into buf (NUL-terminated, truncated to buflen) */
spinmet_status spinmet_config_get(const spinmet_config* cfg, const char* key,
                                  char* buf, size_t buflen);
spinmet_status spinmet_config_load_file(spinmet_config* cfg, const char* path);

/* execution; validation failures surface through spinmet_result_status */
spinmet_status spinmet_run(const spinmet_config* cfg, spinmet_result** result);
void spinmet_result_free(spinmet_result* result);

/* results */
size_t spinmet_result_count(const spinmet_result* result); /* records or checks */
int spinmet_result_status(const spinmet_result* result);   /* 0 ok, 2 validation */
/* borrowed pointers, valid until spinmet_result_free */
const char* spinmet_result_csv(const spinmet_result* result);
const char* spinmet_result_json(const spinmet_result* result);
const char* spinmet_result_manifest_json(const spinmet_result* result); /* "" if none */
/* scalar output fields of record i: "fq_plus_eff", "fq_minus_eff",
 * "fq_total", "fc", "prob_plus", "prob_minus" */
spinmet_status spinmet_result_value(const spinmet_result* result, size_t i,
                                    const char* field, double* value);
spinmet_status spinmet_result_write(const spinmet_result* result,
                                    const spinmet_config* cfg, const char* path);

/* closed-form evaluators */
spinmet_status spinmet_hl_qfi(int N, double* value);
spinmet_status spinmet_thermal_qfi_exact(int N, double beta, double* value);
spinmet_status spinmet_thermal_qfi_bound(int N, double beta, double* value);
spinmet_status spinmet_measurement_delay_qfi(int N, double dt, double omega_a,
                                             double t1opt, double theta, double g,
                                             double* value);
spinmet_status spinmet_encoding_delay_qfi(int N, double dt, double g,
                                          double omega_p, double* value);

/* description of the last error on this thread; empty string if none */
const char* spinmet_last_error(void);

#ifdef __cplusplus
}
#endif

#endif /* SPINMET_H */
