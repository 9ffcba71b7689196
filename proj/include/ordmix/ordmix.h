#ifndef ORDMIX_H
#define ORDMIX_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  define ORDMIX_API __declspec(dllexport)
#else
#  define ORDMIX_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. 0 is success; every other value names a failure class. */
typedef enum ordmix_status {
  ORDMIX_OK = 0,
  ORDMIX_INVALID_ARGUMENT = 1,
  ORDMIX_INVALID_CONFIG = 2,
  ORDMIX_INVALID_SPEC = 3,
  ORDMIX_INVALID_VARIANT = 4,
  ORDMIX_EMPTY_DATASET = 5,
  ORDMIX_DEGENERATE_ITEM = 6,
  ORDMIX_SCHEMA_MISMATCH = 7,
  ORDMIX_UNSEEN_CATEGORY = 8,
  ORDMIX_PARSE_ERROR = 9,
  ORDMIX_NON_INTEGER_CELL = 10,
  ORDMIX_ALL_ROWS_DROPPED = 11,
  ORDMIX_LENGTH_MISMATCH = 12,
  ORDMIX_NODE_SET_MISMATCH = 13,
  ORDMIX_NO_MATCHED_CLUSTERS = 14,
  ORDMIX_EMPTY_TEST_SET = 15,
  ORDMIX_DOMAIN_ERROR = 16,
  ORDMIX_INVALID_WEIGHTS = 17,
  ORDMIX_NON_FINITE = 18,
  ORDMIX_IO_ERROR = 19,
  ORDMIX_INTERNAL = 20
} ordmix_status;

typedef struct ordmix_dataset ordmix_dataset;
typedef struct ordmix_model ordmix_model;

ORDMIX_API const char* ordmix_version(void);
ORDMIX_API const char* ordmix_status_name(int status);
/* Process exit code for a status: 0 ok, 2 config/io, 3 data, 4 numeric, 1 internal. */
ORDMIX_API int ordmix_exit_code(int status);
/* Message of the last failure on the calling thread; never NULL. */
ORDMIX_API const char* ordmix_last_error(void);
/* Frees strings returned through char** out-parameters. */
ORDMIX_API void ordmix_string_free(char* s);

/* options_json may be NULL: {"missing_token": "NA", "schema": path, "weight_column": name} */
ORDMIX_API int ordmix_dataset_from_csv(const char* path, const char* options_json, ordmix_dataset** out);
/* Row-major 1-based codes. names and category_counts hold `items` entries;
   category_counts may be NULL to infer the maximum observed code. */
ORDMIX_API int ordmix_dataset_from_codes(const int32_t* codes, size_t rows, size_t items, const char* const* names,
                                         const int32_t* category_counts, ordmix_dataset** out);
ORDMIX_API int ordmix_dataset_shape(const ordmix_dataset* data, size_t* rows, size_t* items);
ORDMIX_API void ordmix_dataset_free(ordmix_dataset* data);

/* Embeds the dataset and fits one mixture of DAGs. config_json uses the
   "mixture" keys of the run configuration plus "seed"; NULL means defaults
   with seed 0. A null "k" runs stick-breaking discovery. */
ORDMIX_API int ordmix_fit(const ordmix_dataset* data, const char* config_json, ordmix_model** out);
ORDMIX_API int ordmix_model_components(const ordmix_model* model, size_t* components, size_t* active);
ORDMIX_API int ordmix_model_assignments(const ordmix_model* model, int32_t* labels, size_t n);
ORDMIX_API int ordmix_model_to_json(const ordmix_model* model, char** out_json);
ORDMIX_API void ordmix_model_free(ordmix_model* model);

ORDMIX_API int ordmix_normal_quantile(double p, double* out);
ORDMIX_API int ordmix_ari(const int32_t* a, const int32_t* b, size_t n, double* out);
ORDMIX_API int ordmix_nmi(const int32_t* a, const int32_t* b, size_t n, double* out);

/* Runs a command (fit, select, benchmark, bootstrap, sensitivity, generate)
   with a JSON run configuration, writing artifacts and manifest.json to its
   output directory. *result_json receives the outcome record even on failure.
   Returns the status of the run. */
ORDMIX_API int ordmix_run(const char* command, const char* config_json, char** result_json);

#ifdef __cplusplus
}
#endif

#endif
