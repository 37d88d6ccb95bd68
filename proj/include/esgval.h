/* C API of the ESG-valued binomial pricing engine.
 *
 * All functions return an esgval_status; ESGVAL_OK means success. On failure
 * esgval_last_error() returns a thread-local description of the most recent
 * error on the calling thread. Handles created by the create/load functions
 * are released with their matching free function.
 */
#ifndef ESGVAL_H
#define ESGVAL_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define ESGVAL_API __declspec(dllexport)
#else
#define ESGVAL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef int32_t esgval_status;

enum {
  ESGVAL_OK = 0,
  ESGVAL_ERR_INVALID_ARGUMENT = 1,
  ESGVAL_ERR_PARSE = 2,
  ESGVAL_ERR_ALIGNMENT = 3,
  ESGVAL_ERR_DOMAIN = 4,
  ESGVAL_ERR_DEGENERATE = 5,
  ESGVAL_ERR_SINGULAR = 6,
  ESGVAL_ERR_NUMERIC = 7,
  ESGVAL_ERR_IO = 8,
  ESGVAL_ERR_INTERNAL = 9
};

enum {
  ESGVAL_CONVENTION_ARITHMETIC = 0,
  ESGVAL_CONVENTION_LOG = 1
};

enum {
  ESGVAL_PAYOFF_CALL = 0,
  ESGVAL_PAYOFF_PUT = 1
};

typedef struct {
  double mu;     /* drift per unit time */
  double sigma;  /* volatility per sqrt unit time */
  double p;      /* physical up probability */
  int32_t convention;
} esgval_model_params;

typedef struct {
  double s0;
  double strike;
  int32_t steps;
  int32_t payoff;
  double dt;
  double rf;     /* per unit time */
} esgval_lattice_spec;

typedef struct {
  double price;
  double q_min;
  double q_max;
  int32_t arb_violation;
} esgval_pricing_result;

ESGVAL_API const char* esgval_version(void);

/* Thread-local message of the last failure on this thread; never NULL. */
ESGVAL_API const char* esgval_last_error(void);

/* ---- scalar operations ---- */

/* Maps a raw ESG score onto a per-step return increment. */
ESGVAL_API esgval_status esgval_normalize_esg(double score, double esg_min,
                                              double esg_max, double c,
                                              double* e_out);

ESGVAL_API esgval_status esgval_bsm_call(double s0, double strike, double rf,
                                         double sigma, double t,
                                         double* price_out);

/* Sharpe-maximizing real root of n^3 + (2+a)n - 2*n_e = 0. */
ESGVAL_API esgval_status esgval_optimal_position_log(double n_e, double a,
                                                     double* n_out);

ESGVAL_API esgval_status esgval_price_european(
    const esgval_lattice_spec* spec, const esgval_model_params* params,
    esgval_pricing_result* out);

/* Moment estimates from a raw return series (see esgval_model_params). */
ESGVAL_API esgval_status esgval_estimate_params(const double* returns,
                                                size_t n_returns, double dt,
                                                int32_t convention,
                                                int32_t unbiased,
                                                esgval_model_params* out);

/* ---- run configuration and commands ---- */

typedef struct esgval_config esgval_config;

ESGVAL_API esgval_status esgval_config_create(esgval_config** out);
ESGVAL_API esgval_status esgval_config_load(const char* path,
                                            esgval_config** out);
ESGVAL_API esgval_status esgval_config_set(esgval_config* config,
                                           const char* key, const char* value);
/* Copies the raw string value of key into buf (NUL-terminated). Fails with
 * ESGVAL_ERR_INVALID_ARGUMENT when the key is not set. */
ESGVAL_API esgval_status esgval_config_get(const esgval_config* config,
                                           const char* key, char* buf,
                                           size_t buf_len);
/* Hex digest identifying the effective configuration; buf holds >= 17 bytes. */
ESGVAL_API esgval_status esgval_config_hash(const esgval_config* config,
                                            char* buf, size_t buf_len);
ESGVAL_API void esgval_config_free(esgval_config* config);

/* Commands mirror the CLI subcommands. Each returns a malloc'd report string
 * through report_out (release with esgval_string_free); out_dir receives the
 * command's files where applicable. report_out may be NULL to discard. */
ESGVAL_API esgval_status esgval_run_esg_price(const esgval_config* config,
                                              const char* out_dir,
                                              char** report_out);
ESGVAL_API esgval_status esgval_run_estimate(const esgval_config* config,
                                             const char* out_dir,
                                             char** report_out);
ESGVAL_API esgval_status esgval_run_price(const esgval_config* config,
                                          char** report_out);
ESGVAL_API esgval_status esgval_run_surface(const esgval_config* config,
                                            const char* out_dir,
                                            char** report_out);
ESGVAL_API esgval_status esgval_run_fit_path(const esgval_config* config,
                                             const char* out_dir,
                                             char** report_out);
ESGVAL_API esgval_status esgval_run_simulate_informed(const esgval_config* config,
                                                      char** report_out);

ESGVAL_API void esgval_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* ESGVAL_H */
