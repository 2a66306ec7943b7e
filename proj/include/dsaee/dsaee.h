/*
 * C interface of the dsaee library: autoencoder-ensemble feature selection
 * for imbalanced binary data.
 *
 * All objects are opaque handles created by *_create / *_load functions and
 * released with the matching *_free function (which accepts NULL). Every
 * fallible call returns a dsaee_status; on failure a description of the
 * error is available from dsaee_last_error() on the same thread until the
 * next call into the library.
 *
 * Handles are not synchronized: a handle may be passed between threads but
 * must not be used from two threads at once.
 */
#ifndef DSAEE_DSAEE_H_
#define DSAEE_DSAEE_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(DSAEE_BUILDING_LIBRARY)
#define DSAEE_API __declspec(dllexport)
#else
#define DSAEE_API __declspec(dllimport)
#endif
#else
#define DSAEE_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Values match the command-line exit codes. */
typedef enum dsaee_status {
  DSAEE_OK = 0,
  DSAEE_ERR_USAGE = 1,
  DSAEE_ERR_DATA = 2,
  DSAEE_ERR_NUMERIC = 3,
  DSAEE_ERR_INTERNAL = 4
} dsaee_status;

typedef struct dsaee_config dsaee_config;
typedef struct dsaee_dataset dsaee_dataset;
typedef struct dsaee_re_matrix dsaee_re_matrix;
typedef struct dsaee_selection dsaee_selection;

DSAEE_API const char* dsaee_version(void);

/* Message of the last failed call on this thread ("" if none). */
DSAEE_API const char* dsaee_last_error(void);

/* Receives warnings; NULL restores the default stderr sink. */
typedef void (*dsaee_log_fn)(const char* message, void* user_data);
DSAEE_API void dsaee_set_log_callback(dsaee_log_fn fn, void* user_data);

/* ---- Run configuration ---------------------------------------------- */

/* Built-in defaults only. */
DSAEE_API dsaee_status dsaee_config_create(dsaee_config** out);
/* Defaults, then the file's preset, then the file's values. */
DSAEE_API dsaee_status dsaee_config_load(const char* path, dsaee_config** out);
/* Overrides one "section.key" setting (highest precedence). */
DSAEE_API dsaee_status dsaee_config_set(dsaee_config* cfg, const char* key,
                                        const char* value);
/* Copies the resolved value of `key` into buf (NUL-terminated, truncated to
 * buf_size). *needed receives the full length plus one. Unset keys yield "". */
DSAEE_API dsaee_status dsaee_config_get(const dsaee_config* cfg, const char* key,
                                        char* buf, size_t buf_size, size_t* needed);
/* Checks that the settings resolve into a valid run configuration. */
DSAEE_API dsaee_status dsaee_config_validate(const dsaee_config* cfg);
DSAEE_API void dsaee_config_free(dsaee_config* cfg);

/* ---- Pipeline runs --------------------------------------------------- */

DSAEE_API dsaee_status dsaee_run_select(const dsaee_config* cfg, const char* out_dir);
DSAEE_API dsaee_status dsaee_run_export_q(const dsaee_config* cfg, const char* out_file);
/* cds_csv may be NULL to rebuild the classification set from the config. */
DSAEE_API dsaee_status dsaee_run_evaluate(const dsaee_config* cfg,
                                          const char* const* selection_files,
                                          size_t n_files, const char* cds_csv,
                                          const char* out_dir);
DSAEE_API dsaee_status dsaee_run_benchmark(const dsaee_config* cfg, const char* out_dir);

/* Writes a synthetic planted-feature dataset as CSV (label column "label",
 * minority rows labelled 1) and, when planted_out is non-NULL, stores the
 * shifted feature indices (planted entries) there. */
DSAEE_API dsaee_status dsaee_write_planted(const char* path, size_t majority,
                                           size_t minority, size_t features,
                                           size_t planted, double shift, uint64_t seed,
                                           size_t* planted_out);

/* ---- Datasets -------------------------------------------------------- */

/* Copies a row-major rows x cols matrix and 0/1 labels (1 = minority). */
DSAEE_API dsaee_status dsaee_dataset_create(const double* x, const int* labels,
                                            size_t rows, size_t cols,
                                            dsaee_dataset** out);
/* minority_label may be NULL to take the rarer label. */
DSAEE_API dsaee_status dsaee_dataset_load_csv(const char* path, const char* label_column,
                                              const char* minority_label,
                                              dsaee_dataset** out);
DSAEE_API size_t dsaee_dataset_rows(const dsaee_dataset* data);
DSAEE_API size_t dsaee_dataset_cols(const dsaee_dataset* data);
DSAEE_API size_t dsaee_dataset_minority_count(const dsaee_dataset* data);
DSAEE_API void dsaee_dataset_free(dsaee_dataset* data);

/* ---- Ensemble and selection ------------------------------------------ */

/* Runs the ensemble on `data` as-is (no scaling or FSDS/CDS split), with
 * network, training and ensemble settings from cfg. */
DSAEE_API dsaee_status dsaee_ensemble_run(const dsaee_dataset* data,
                                          const dsaee_config* cfg,
                                          dsaee_re_matrix** out);
DSAEE_API size_t dsaee_re_matrix_rows(const dsaee_re_matrix* re);
DSAEE_API size_t dsaee_re_matrix_cols(const dsaee_re_matrix* re);
/* Copies rows*cols row-major values and rows labels; either pointer may be NULL. */
DSAEE_API dsaee_status dsaee_re_matrix_copy(const dsaee_re_matrix* re, double* values,
                                            int* labels);
DSAEE_API void dsaee_re_matrix_free(dsaee_re_matrix* re);

/* Mean aggregation; delta_quantile in [0, 1). */
DSAEE_API dsaee_status dsaee_select(const dsaee_re_matrix* re, double delta_quantile,
                                    dsaee_selection** out);
DSAEE_API size_t dsaee_selection_count(const dsaee_selection* sel);
DSAEE_API double dsaee_selection_threshold(const dsaee_selection* sel);
/* Copies dsaee_selection_count() ascending feature indices. */
DSAEE_API dsaee_status dsaee_selection_indices(const dsaee_selection* sel, size_t* out);
/* Copies the per-feature delta vector (cols entries). */
DSAEE_API dsaee_status dsaee_selection_delta(const dsaee_selection* sel, double* out);
DSAEE_API void dsaee_selection_free(dsaee_selection* sel);

/* ---- Metrics --------------------------------------------------------- */

DSAEE_API dsaee_status dsaee_auroc(const double* scores, const int* labels, size_t n,
                                   double* out);
DSAEE_API dsaee_status dsaee_sensitivity(const double* scores, const int* labels,
                                         size_t n, double cutoff, double* out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* DSAEE_DSAEE_H_ */
