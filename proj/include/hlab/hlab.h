#ifndef HLAB_H
#define HLAB_H

/* C interface to the hlab library. Every call returns an hlab_status; on
   failure hlab_last_error() describes the most recent error on the calling
   thread. Strings returned through out-parameters are owned by the caller and
   released with hlab_string_free. */

#include <stddef.h>
#include <stdint.h>

#if defined(HLAB_BUILDING_LIBRARY)
#define HLAB_API __attribute__((visibility("default")))
#else
#define HLAB_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hlab_status {
    HLAB_OK = 0,
    HLAB_ERR_INVALID_ARGUMENT = 1,
    HLAB_ERR_CONFIG = 2,
    HLAB_ERR_NUMERICAL = 3,
    HLAB_ERR_IO = 4,
    HLAB_ERR_INTERNAL = 5
} hlab_status;

typedef struct hlab_config hlab_config;
typedef struct hlab_result hlab_result;
typedef struct hlab_operator hlab_operator;
typedef struct hlab_factorization hlab_factorization;

HLAB_API const char* hlab_version(void);

/* Message of the last failure on this thread, "" if none. */
HLAB_API const char* hlab_last_error(void);
/* Dotted config path of the last HLAB_ERR_CONFIG failure, "" otherwise. */
HLAB_API const char* hlab_last_error_field(void);

HLAB_API void hlab_string_free(char* text);

/* Configuration: a JSON document. */
HLAB_API hlab_status hlab_config_parse(const char* json_text, hlab_config** out);
/* Normalised configuration with every default filled in. */
HLAB_API hlab_status hlab_config_json(const hlab_config* config, char** out);
HLAB_API void hlab_config_free(hlab_config* config);

HLAB_API hlab_status hlab_run_study(const hlab_config* config, hlab_result** out);
HLAB_API int hlab_result_pass(const hlab_result* result);
HLAB_API hlab_status hlab_result_report(const hlab_result* result, char** out);
HLAB_API hlab_status hlab_result_summary(const hlab_result* result, char** out);
HLAB_API size_t hlab_result_file_count(const hlab_result* result);
HLAB_API hlab_status hlab_result_file(const hlab_result* result, size_t index, char** name, char** content);
HLAB_API void hlab_result_free(hlab_result* result);

/* reports_json is a JSON array of reports. */
HLAB_API hlab_status hlab_merge_reports(const char* reports_json, char** out);

/* Operators. kind is "polyharmonic" or "random"; delta, seed and band only
   apply to "random". */
HLAB_API hlab_status hlab_operator_create(int dimension, int points_per_axis, int half_order, const char* kind,
                                          double delta, uint64_t seed, int band, hlab_operator** out);
HLAB_API size_t hlab_operator_size(const hlab_operator* op);
HLAB_API double hlab_operator_lambda1(const hlab_operator* op);
HLAB_API void hlab_operator_free(hlab_operator* op);

HLAB_API hlab_status hlab_factorization_create(const hlab_operator* op, hlab_factorization** out);
HLAB_API double hlab_factorization_residual(const hlab_factorization* fact);
HLAB_API void hlab_factorization_free(hlab_factorization* fact);

/* Grid functions are interleaved (re, im) arrays of length 2 * size. */
HLAB_API hlab_status hlab_semigroup_apply(const hlab_factorization* fact, double t, const double* input,
                                          double* output);
/* ||S_L f||_{L^p} on the default time grid with the given number of levels. */
HLAB_API hlab_status hlab_hardy_quasinorm(const hlab_factorization* fact, const double* input, double p, int levels,
                                          double* out);

#ifdef __cplusplus
}
#endif

#endif
