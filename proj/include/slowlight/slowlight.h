/*
 * slowlight: C interface to the Lambda-medium Maxwell-Bloch simulator.
 *
 * All functions return an sl_status. On failure a description of the last
 * error on the calling thread is available from sl_last_error(). Handles are
 * opaque and must be released with the matching *_free function.
 */
#ifndef SLOWLIGHT_SLOWLIGHT_H
#define SLOWLIGHT_SLOWLIGHT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(SLOWLIGHT_BUILDING_LIBRARY)
#    define SL_API __declspec(dllexport)
#  else
#    define SL_API __declspec(dllimport)
#  endif
#else
#  define SL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sl_status {
  SL_OK = 0,
  SL_ERR_INTERNAL = 1,
  SL_ERR_PARSE = 2,      /* config syntax/range/missing/unknown key, usage */
  SL_ERR_NUMERIC = 3,    /* instability, non-finite values */
  SL_ERR_IO = 4,
  SL_ERR_ARGUMENT = 5    /* invalid argument to a library function */
} sl_status;

/* Sub-category of SL_ERR_PARSE. */
typedef enum sl_parse_category {
  SL_PARSE_NONE = 0,
  SL_PARSE_SYNTAX = 1,
  SL_PARSE_RANGE = 2,
  SL_PARSE_MISSING_KEY = 3,
  SL_PARSE_UNKNOWN_KEY = 4,
  SL_PARSE_USAGE = 5
} sl_parse_category;

typedef struct sl_config sl_config;
typedef struct sl_trace sl_trace;

typedef struct sl_options {
  const char* out_dir;   /* NULL: current directory */
  int threads;           /* 0: hardware concurrency */
  uint64_t seed;         /* reserved */
  const char* input;     /* sl_cmd_fit: sweep CSV */
  const char* model;     /* sl_cmd_fit: "gaussian_sq" | "exponential" | NULL */
  int quiet;             /* nonzero: no warnings on stderr */
} sl_options;

typedef struct sl_fit_result {
  double I0;
  double tau;
  double rms_residual;
  int n_points;
  int iterations;
  int converged;
  int decaying;
} sl_fit_result;

typedef enum sl_trace_column {
  SL_TRACE_T = 0,
  SL_TRACE_FWD = 1,
  SL_TRACE_BWD = 2,
  SL_TRACE_SPIN = 3
} sl_trace_column;

SL_API const char* sl_version(void);
SL_API const char* sl_status_string(sl_status status);

/* Thread-local details of the last failure; "" after success. */
SL_API const char* sl_last_error(void);
SL_API sl_parse_category sl_last_parse_category(void);
SL_API int sl_last_error_line(void);

SL_API void sl_options_init(sl_options* options);

SL_API sl_status sl_config_parse(const char* text, sl_config** out);
SL_API sl_status sl_config_load(const char* path, sl_config** out);
SL_API void sl_config_free(sl_config* config);
/* Canonical text; release with sl_string_free. */
SL_API sl_status sl_config_to_text(const sl_config* config, char** out);
SL_API sl_status sl_config_hash(const sl_config* config, uint64_t* out);
SL_API void sl_string_free(char* s);

SL_API sl_status sl_cmd_spectrum(const sl_config* config, const sl_options* options);
SL_API sl_status sl_cmd_run(const sl_config* config, const sl_options* options);
SL_API sl_status sl_cmd_sweep(const sl_config* config, const sl_options* options);
SL_API sl_status sl_cmd_fit(const sl_config* config, const sl_options* options);

/* Runs the configured protocol in memory. */
SL_API sl_status sl_run_trace(const sl_config* config, sl_trace** out);
SL_API size_t sl_trace_size(const sl_trace* trace);
SL_API sl_status sl_trace_column_data(const sl_trace* trace, sl_trace_column column,
                                      const double** data, size_t* size);
SL_API void sl_trace_free(sl_trace* trace);

SL_API sl_status sl_dephasing_time(double delta_S_khz, double* out_us);
SL_API sl_status sl_balance_residual(double omega_C, double g_C, double omega_A, double g_A,
                                     double* out);
SL_API sl_status sl_fit_decay(const double* t, const double* intensity, size_t n,
                              const char* model, sl_fit_result* out);

#ifdef __cplusplus
}
#endif

#endif
