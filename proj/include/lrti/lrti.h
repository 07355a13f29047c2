/* C interface to the low-rank time integrators.
 *
 * All objects are opaque handles created and destroyed by this library.
 * Every function returns an lrti_status; on failure the calling thread's
 * lrti_last_error() describes the problem. Output pointers are written only
 * on success.
 */
#ifndef LRTI_LRTI_H
#define LRTI_LRTI_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define LRTI_API __declspec(dllexport)
#else
#define LRTI_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lrti_status {
  LRTI_OK = 0,
  LRTI_ERR_INVALID_ARGUMENT = 1,
  LRTI_ERR_SHAPE = 2,
  LRTI_ERR_CONFIG = 3,
  LRTI_ERR_NOT_CONVERGED = 4,
  LRTI_ERR_IO = 5,
  LRTI_ERR_DOMAIN = 6,
  LRTI_ERR_INTERNAL = 7
} lrti_status;

LRTI_API const char* lrti_version(void);
/* Message of the most recent failure on this thread, "" if none. */
LRTI_API const char* lrti_last_error(void);
LRTI_API const char* lrti_status_string(lrti_status status);

/* Receives warnings and report lines. */
typedef void (*lrti_message_fn)(const char* message, void* user);

/* ---- Low-rank matrices ------------------------------------------------- */

typedef struct lrti_matrix lrti_matrix;

/* Column-major dense input. `imag` may be NULL for a real matrix. Singular
 * values <= drop_tol are discarded. */
LRTI_API lrti_status lrti_matrix_from_dense(size_t rows, size_t cols, const double* real,
                                            const double* imag, double drop_tol,
                                            lrti_matrix** out);
LRTI_API void lrti_matrix_free(lrti_matrix* m);
LRTI_API lrti_status lrti_matrix_shape(const lrti_matrix* m, size_t* rows, size_t* cols,
                                       size_t* rank, int* is_complex);
/* Writes rank() values into `sigma`. */
LRTI_API lrti_status lrti_matrix_singular_values(const lrti_matrix* m, double* sigma);
/* Column-major dense output; `imag` may be NULL for real matrices. */
LRTI_API lrti_status lrti_matrix_to_dense(const lrti_matrix* m, double* real, double* imag);
/* a + b recompressed to delta (0 keeps everything above the noise floor). */
LRTI_API lrti_status lrti_matrix_add(const lrti_matrix* a, const lrti_matrix* b, double delta,
                                     lrti_matrix** out);
LRTI_API lrti_status lrti_matrix_soft_threshold(const lrti_matrix* m, double alpha,
                                                lrti_matrix** out);
LRTI_API lrti_status lrti_matrix_hard_threshold(const lrti_matrix* m, double alpha,
                                                lrti_matrix** out);
LRTI_API lrti_status lrti_matrix_recompress(const lrti_matrix* m, double delta, lrti_matrix** out);
LRTI_API lrti_status lrti_matrix_distance(const lrti_matrix* a, const lrti_matrix* b,
                                          double* out);

/* ---- Collocation rules --------------------------------------------------- */

typedef enum lrti_node_kind { LRTI_NODES_GAUSS = 0, LRTI_NODES_RADAU = 1 } lrti_node_kind;

typedef struct lrti_rule lrti_rule;

LRTI_API lrti_status lrti_rule_create(lrti_node_kind kind, int J, double t0, double h,
                                      lrti_rule** out);
LRTI_API void lrti_rule_free(lrti_rule* rule);
LRTI_API int lrti_rule_size(const lrti_rule* rule);
/* J nodes and J weights. */
LRTI_API lrti_status lrti_rule_nodes(const lrti_rule* rule, double* nodes, double* weights);
/* Row-major J x J partial integrals omega[j][m]. */
LRTI_API lrti_status lrti_rule_integration_matrix(const lrti_rule* rule, double* omega);
LRTI_API lrti_status lrti_rule_lebesgue(const lrti_rule* rule, double* lambda);

/* ---- Experiments ----------------------------------------------------------- */

typedef struct lrti_config lrti_config;

LRTI_API size_t lrti_preset_count(void);
LRTI_API const char* lrti_preset_name(size_t index);

LRTI_API lrti_status lrti_config_preset(const char* name, lrti_config** out);
/* Parse errors carry "source:line: message" in lrti_last_error(); `line` (may
 * be NULL) receives the offending line number. */
LRTI_API lrti_status lrti_config_parse(const char* text, const char* source, lrti_config** out,
                                       int* line);
LRTI_API lrti_status lrti_config_load(const char* path, lrti_config** out, int* line);
LRTI_API void lrti_config_free(lrti_config* config);
LRTI_API lrti_status lrti_config_set(lrti_config* config, const char* key, const char* value);
/* Text form of the configuration; valid until the next call on `config`. */
LRTI_API const char* lrti_config_dump(lrti_config* config);
/* Configured output directory after the LRTI_OUTPUT_DIR override. */
LRTI_API const char* lrti_config_output_dir(lrti_config* config);

typedef struct lrti_run_summary {
  int converged;
  int has_reference;
  int intervals;
  int total_iterations;
  double max_error; /* NaN without reference */
  double max_norm_dev;
  int max_rank;
  int max_optimal_rank; /* -1 without reference */
  int max_intermediate_rank;
} lrti_run_summary;

/* Runs the configured experiment and writes trace.csv, boundary.csv,
 * ranks.csv and config.txt to `output_dir` (NULL: lrti_config_output_dir).
 * Returns LRTI_ERR_NOT_CONVERGED, with files and summary still written, when
 * an interval hit its iteration cap. */
LRTI_API lrti_status lrti_run(const lrti_config* config, const char* output_dir,
                              lrti_message_fn warn, void* user, lrti_run_summary* summary);

/* Boundary-error convergence study with thresholds off; writes
 * convergence.csv to `csv_path` and the fitted order per J into
 * `fitted_orders` (length n_J, may be NULL). */
LRTI_API lrti_status lrti_convergence(const int* J, size_t n_J, const double* h, size_t n_h,
                                      int K, double T, const char* csv_path,
                                      double* fitted_orders);

/* Randomized property suite; one report line per property. `failures`
 * receives the number of failed properties. */
LRTI_API lrti_status lrti_properties(uint64_t seed, int pairs, lrti_message_fn report, void* user,
                                     int* failures);

#ifdef __cplusplus
}
#endif

#endif
