/* C interface to the topomcts library. All functions return a tm_status;
 * on failure tm_last_error() describes the error for the calling thread.
 * Strings returned through char** are owned by the caller (tm_string_free). */
#ifndef TOPOMCTS_H
#define TOPOMCTS_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define TM_API __declspec(dllexport)
#else
#define TM_API __attribute__((visibility("default")))
#endif

typedef enum tm_status {
    TM_OK = 0,
    TM_ERR_INVALID_ARGUMENT,
    TM_ERR_CELL_ALREADY_FILLED,
    TM_ERR_COLOR_OUT_OF_RANGE,
    TM_ERR_EMPTY_GRID,
    TM_ERR_SHAPE_MISMATCH,
    TM_ERR_NO_MISSING_CELLS,
    TM_ERR_INVALID_ASSIGNMENT,
    TM_ERR_CELL_NOT_IN_GRAPH,
    TM_ERR_NO_VALID_COLORS,
    TM_ERR_NO_CONVERGENCE,
    TM_ERR_NO_CHILDREN,
    TM_ERR_EMPTY_LIST,
    TM_ERR_INFEASIBLE_SPEC,
    TM_ERR_MALFORMED_DOCUMENT,
    TM_ERR_SHAPE_CHANGE_UNSUPPORTED,
    TM_ERR_NO_TASKS_FOUND,
    TM_ERR_IO,
    TM_ERR_SCHEMA_MISMATCH,
    TM_ERR_INVARIANT_VIOLATION,
    TM_ERR_INTERNAL = 100
} tm_status;

typedef enum tm_mode {
    TM_MODE_VANILLA = 0,
    TM_MODE_GRID_TOPOLOGY,
    TM_MODE_LAMBDA2_ONLY,
    TM_MODE_RIGIDITY_ONLY,
    TM_MODE_FULL
} tm_mode;

typedef struct tm_task tm_task;
typedef struct tm_suite tm_suite;

TM_API const char* tm_version(void);
TM_API const char* tm_last_error(void);
TM_API const char* tm_status_name(tm_status status);
TM_API void tm_string_free(char* s);

/* Tasks. Cells are row-major with -1 for missing; truth may be NULL. */
TM_API tm_status tm_task_create(int rows, int cols, int alphabet_size, const int* cells,
                                const int* truth, tm_task** out);
TM_API tm_status tm_task_from_json(const char* json, tm_task** out);
TM_API tm_status tm_task_to_json(const tm_task* task, char** out);
TM_API void tm_task_free(tm_task* task);
TM_API tm_status tm_task_shape(const tm_task* task, int* rows, int* cols, int* alphabet_size,
                               int* missing);
/* Detected rule name, e.g. "rotational_symmetry_180". */
TM_API tm_status tm_detect_pattern(const tm_task* task, char** rule_out);
TM_API tm_status tm_grid_lambda2(int rows, int cols, double* out);

typedef struct tm_features {
    double lambda2;
    double max_rigidity;
    double color_stdev;
    double composite;
    size_t graph_nodes;
    size_t graph_edges;
} tm_features;

/* Root compatibility-graph features; rule NULL means the detected rule. */
TM_API tm_status tm_root_features(const tm_task* task, const char* rule, tm_features* out);

typedef struct tm_search_config {
    int iterations;
    uint64_t seed;
    uint64_t stream;
    tm_mode mode;
    double c;
    double beta;
    double w_lambda;
    double w_r;
    double w_sigma;
    double time_limit_sec; /* <= 0: none */
} tm_search_config;

typedef struct tm_search_summary {
    int solved;
    double reward;
    int iterations_used;
    int nodes_expanded;
    double wall_ms;
    int rollouts_to_solution; /* -1 when unsolved */
    int timed_out;
} tm_search_summary;

TM_API void tm_search_config_default(tm_search_config* config);
/* Needs a task with ground truth; rule NULL means the detected rule. */
TM_API tm_status tm_search(const tm_task* task, const char* rule, const tm_search_config* config,
                           tm_search_summary* out);

/* Synthetic suites. counts follow rotational, reflective, colour frequency,
 * arithmetic progression, spatial. */
typedef struct tm_suite_config {
    int counts[5];
    int rows;
    int cols;
    int alphabet_size;
    int min_missing;
    int max_missing;
} tm_suite_config;

TM_API void tm_suite_config_default(tm_suite_config* config);
TM_API void tm_suite_config_uniform(tm_suite_config* config, int per_type);
TM_API tm_status tm_suite_build(const tm_suite_config* config, uint64_t seed, tm_suite** out);
TM_API void tm_suite_free(tm_suite* suite);
TM_API size_t tm_suite_size(const tm_suite* suite);
/* Copies task i; id and rule may be NULL. */
TM_API tm_status tm_suite_get(const tm_suite* suite, size_t index, tm_task** task, char** id,
                              char** rule);

/* Experiments. Each writes its CSV and table files into out_dir. */
TM_API int tm_worker_count(void);
TM_API tm_status tm_run_detection(const tm_suite_config* config, uint64_t seed, const char* out_dir,
                                  int* correct, int* total);
TM_API tm_status tm_run_ablation(const tm_suite_config* config, uint64_t suite_seed,
                                 const uint64_t* seeds, size_t seed_count, int iterations,
                                 int threads, const char* out_dir);
TM_API tm_status tm_run_features(const tm_suite_config* config, uint64_t seed, int threads,
                                 const char* out_dir);
TM_API tm_status tm_run_arc(const char* dir, int rollout_budget, double timeout_sec, uint64_t seed,
                            int threads, const char* out_dir, int* tasks_run, int* skipped);
TM_API tm_status tm_make_tables(const char* results_csv, const char* out_dir);

#ifdef __cplusplus
}
#endif

#endif
