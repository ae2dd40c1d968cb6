/* C interface of the hardyheat shared library.
 *
 * All functions return hh_status; failure details are available through
 * hh_last_error() (thread local). Strings returned through output parameters
 * are owned by the caller and released with hh_string_free(). Reports are
 * opaque handles released with hh_report_close().
 */
#ifndef HARDYHEAT_H
#define HARDYHEAT_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hh_status {
  HH_OK = 0,
  HH_ERR_NO_SUCH_STRATUM,
  HH_ERR_OUTSIDE_DOMAIN,
  HH_ERR_RADIUS_TOO_LARGE,
  HH_ERR_NON_INTEGRABLE_WEIGHT,
  HH_ERR_HARDY_CONSTANT_EXCEEDED,
  HH_ERR_PARAMETER_OUT_OF_RANGE,
  HH_ERR_OVERLAPPING_SINGULARITIES,
  HH_ERR_ASYMMETRIC_COEFFICIENT,
  HH_ERR_BUDGET_EXCEEDED,
  HH_ERR_QUADRATURE_BREAKDOWN,
  HH_ERR_NOT_BOUNDED_BELOW,
  HH_ERR_WINDOW_TOO_NARROW,
  HH_ERR_DIVISION_UNDERFLOW,
  HH_ERR_FACTORIZATION_FAILED,
  HH_ERR_NONFINITE_STATE,
  HH_ERR_TAIL_NOT_CONVERGED,
  HH_ERR_EMPTY_GRID,
  HH_ERR_UNBOUNDED_RATIO,
  HH_ERR_NONCONVERGED_MINIMIZER,
  HH_ERR_NONFINITE_ENTROPY,
  HH_ERR_ZERO_DENOMINATOR,
  HH_ERR_EXCLUDED_EXPONENT,
  HH_ERR_NONPOSITIVE_SOLUTION,
  HH_ERR_CONFIG_INVALID,
  HH_ERR_SCHEMA_MISMATCH,
  HH_ERR_IO,
  HH_ERR_INTERNAL
} hh_status;

typedef struct hh_report hh_report; /* opaque */

typedef struct hh_run_options {
  const char* out_dir;   /* NULL: use the config's out_dir */
  int64_t seed;          /* < 0: use the config's seed */
  int jobs;              /* <= 1: sequential */
  int dry_run;           /* validate the config only */
  int dump_matrices;     /* coordinate-format matrix dumps */
} hh_run_options;

const char* hh_version(void);
const char* hh_last_error(void);
const char* hh_status_name(hh_status s);

hh_status hh_validate_config(const char* config_path);

/* Runs the experiment; *exit_code receives the CLI convention:
 * 0 all checks pass, 2 some verdict inconclusive, 1 failed checks. */
hh_status hh_run(const char* config_path, const hh_run_options* opts, int* exit_code);

hh_status hh_report_open(const char* path, hh_report** out);
void hh_report_close(hh_report* report);

/* Relative comparison; *within = 1 when all numeric fields agree to rel_tol.
 * diff_json (optional) receives the offending fields. */
hh_status hh_report_compare(const hh_report* a, const hh_report* b, double rel_tol,
                            int* within, char** diff_json);

hh_status hh_catalog_json(char** json);

void hh_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* HARDYHEAT_H */
