#include "topomcts/topomcts.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include "topomcts/error.hpp"
#include "topomcts/harness.hpp"

using namespace topomcts;

struct tm_task {
    GridTask task;
};

struct tm_suite {
    std::vector<SuiteTask> tasks;
};

namespace {

thread_local std::string g_last_error;

tm_status fail(tm_status status, const char* message) {
    g_last_error = message;
    return status;
}

template <typename F>
tm_status guarded(F&& fn) {
    try {
        fn();
        g_last_error.clear();
        return TM_OK;
    } catch (const Error& e) {
        return fail(static_cast<tm_status>(static_cast<int>(e.code()) + 1), e.what());
    } catch (const std::bad_alloc&) {
        return fail(TM_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(TM_ERR_INTERNAL, e.what());
    }
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

void require(bool ok, const char* what) {
    if (!ok) throw Error(ErrorCode::InvalidArgument, what);
}

SuiteConfig to_config(const tm_suite_config* c) {
    SuiteConfig cfg;
    if (!c) return cfg;
    for (std::size_t i = 0; i < cfg.counts.size(); ++i) cfg.counts[i] = c->counts[i];
    cfg.rows = c->rows;
    cfg.cols = c->cols;
    cfg.alphabet_size = c->alphabet_size;
    cfg.min_missing = c->min_missing;
    cfg.max_missing = c->max_missing;
    return cfg;
}

void from_config(const SuiteConfig& cfg, tm_suite_config* c) {
    for (std::size_t i = 0; i < cfg.counts.size(); ++i) c->counts[i] = cfg.counts[i];
    c->rows = cfg.rows;
    c->cols = cfg.cols;
    c->alphabet_size = cfg.alphabet_size;
    c->min_missing = cfg.min_missing;
    c->max_missing = cfg.max_missing;
}

PatternRule rule_or_detect(const GridTask& task, const char* rule) {
    return rule ? parse_rule(rule) : detect_pattern(task);
}

}  // namespace

extern "C" {

const char* tm_version(void) { return "0.1.0"; }

const char* tm_last_error(void) { return g_last_error.c_str(); }

const char* tm_status_name(tm_status status) {
    if (status == TM_OK) return "Ok";
    if (status == TM_ERR_INTERNAL) return "Internal";
    const int code = static_cast<int>(status) - 1;
    if (code < 0 || code > static_cast<int>(ErrorCode::InvariantViolation)) return "Unknown";
    return to_string(static_cast<ErrorCode>(code));
}

void tm_string_free(char* s) { std::free(s); }

tm_status tm_task_create(int rows, int cols, int alphabet_size, const int* cells, const int* truth,
                         tm_task** out) {
    return guarded([&] {
        require(cells && out, "cells and out must be non-null");
        require(rows > 0 && cols > 0, "grid shape must be positive");
        const std::size_t n = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
        std::vector<std::optional<Color>> values(n);
        for (std::size_t i = 0; i < n; ++i) {
            if (cells[i] != kMissingCode) values[i] = cells[i];
        }
        std::optional<std::vector<Color>> gt;
        if (truth) gt.emplace(truth, truth + n);
        *out = new tm_task{GridTask(rows, cols, alphabet_size, std::move(values), std::move(gt))};
    });
}

tm_status tm_task_from_json(const char* json, tm_task** out) {
    return guarded([&] {
        require(json && out, "json and out must be non-null");
        *out = new tm_task{task_from_json_string(json)};
    });
}

tm_status tm_task_to_json(const tm_task* task, char** out) {
    return guarded([&] {
        require(task && out, "task and out must be non-null");
        *out = dup_string(task_to_json_string(task->task));
    });
}

void tm_task_free(tm_task* task) { delete task; }

tm_status tm_task_shape(const tm_task* task, int* rows, int* cols, int* alphabet_size, int* missing) {
    return guarded([&] {
        require(task, "task must be non-null");
        if (rows) *rows = task->task.rows();
        if (cols) *cols = task->task.cols();
        if (alphabet_size) *alphabet_size = task->task.alphabet_size();
        if (missing) *missing = task->task.missing_count();
    });
}

tm_status tm_detect_pattern(const tm_task* task, char** rule_out) {
    return guarded([&] {
        require(task && rule_out, "task and rule_out must be non-null");
        *rule_out = dup_string(to_string(detect_pattern(task->task)));
    });
}

tm_status tm_grid_lambda2(int rows, int cols, double* out) {
    return guarded([&] {
        require(out, "out must be non-null");
        require(rows > 0 && cols > 0, "grid shape must be positive");
        *out = grid_laplacian_lambda2(rows, cols);
    });
}

tm_status tm_root_features(const tm_task* task, const char* rule, tm_features* out) {
    return guarded([&] {
        require(task && out, "task and out must be non-null");
        const auto graph = build_compat_graph(task->task, rule_or_detect(task->task, rule));
        const auto f = composite_feature(graph, task->task, FeatureWeights{});
        *out = tm_features{f.lambda2,    f.max_rigidity,      f.color_count_stdev,
                           f.composite_f, graph.node_count(), graph.edge_count()};
    });
}

void tm_search_config_default(tm_search_config* config) {
    if (!config) return;
    const SelectionParams p;
    const SearchOptions o;
    *config = tm_search_config{o.iterations, 0,   0,   TM_MODE_FULL, p.c, p.beta, p.weights.w_lambda,
                               p.weights.w_r, p.weights.w_sigma, 0.0};
}

tm_status tm_search(const tm_task* task, const char* rule, const tm_search_config* config,
                    tm_search_summary* out) {
    return guarded([&] {
        require(task && config && out, "task, config and out must be non-null");
        require(config->mode >= TM_MODE_VANILLA && config->mode <= TM_MODE_FULL, "unknown mode");
        SelectionParams params;
        params.mode = kAllModes[config->mode];
        params.c = config->c;
        params.beta = config->beta;
        params.weights = {config->w_lambda, config->w_r, config->w_sigma};
        SearchOptions opts;
        opts.iterations = config->iterations;
        opts.seed = config->seed;
        opts.stream = config->stream;
        if (config->time_limit_sec > 0.0) opts.time_limit = std::chrono::duration<double>(config->time_limit_sec);
        const auto res = run_search(task->task, rule_or_detect(task->task, rule), params, opts);
        *out = tm_search_summary{res.solved ? 1 : 0,
                                 res.reward,
                                 res.iterations_used,
                                 res.nodes_expanded,
                                 std::chrono::duration<double, std::milli>(res.wall_time).count(),
                                 res.rollouts_to_solution.value_or(-1),
                                 res.timed_out ? 1 : 0};
    });
}

void tm_suite_config_default(tm_suite_config* config) {
    if (config) from_config(SuiteConfig{}, config);
}

void tm_suite_config_uniform(tm_suite_config* config, int per_type) {
    if (config) from_config(SuiteConfig::uniform(per_type), config);
}

tm_status tm_suite_build(const tm_suite_config* config, uint64_t seed, tm_suite** out) {
    return guarded([&] {
        require(out, "out must be non-null");
        *out = new tm_suite{build_suite(to_config(config), seed)};
    });
}

void tm_suite_free(tm_suite* suite) { delete suite; }

size_t tm_suite_size(const tm_suite* suite) { return suite ? suite->tasks.size() : 0; }

tm_status tm_suite_get(const tm_suite* suite, size_t index, tm_task** task, char** id, char** rule) {
    return guarded([&] {
        require(suite && task, "suite and task must be non-null");
        require(index < suite->tasks.size(), "suite index out of range");
        const auto& t = suite->tasks[index];
        char* id_copy = id ? dup_string(t.id) : nullptr;
        char* rule_copy = nullptr;
        try {
            if (rule) rule_copy = dup_string(to_string(t.rule));
            *task = new tm_task{t.task};
        } catch (...) {
            std::free(id_copy);
            std::free(rule_copy);
            throw;
        }
        if (id) *id = id_copy;
        if (rule) *rule = rule_copy;
    });
}

int tm_worker_count(void) { return worker_count(); }

tm_status tm_run_detection(const tm_suite_config* config, uint64_t seed, const char* out_dir,
                           int* correct, int* total) {
    return guarded([&] {
        require(out_dir, "out_dir must be non-null");
        const auto s = run_detection_experiment(to_config(config), seed, out_dir);
        if (correct) *correct = s.correct;
        if (total) *total = s.total;
    });
}

tm_status tm_run_ablation(const tm_suite_config* config, uint64_t suite_seed, const uint64_t* seeds,
                          size_t seed_count, int iterations, int threads, const char* out_dir) {
    return guarded([&] {
        require(out_dir && (seeds || seed_count == 0), "out_dir and seeds must be non-null");
        AblationOptions opts;
        opts.seeds.assign(seeds, seeds + seed_count);
        opts.iterations = iterations;
        opts.threads = threads > 0 ? threads : worker_count();
        run_ablation(to_config(config), opts, suite_seed, out_dir);
    });
}

tm_status tm_run_features(const tm_suite_config* config, uint64_t seed, int threads, const char* out_dir) {
    return guarded([&] {
        require(out_dir, "out_dir must be non-null");
        run_feature_study(to_config(config), seed, out_dir, threads > 0 ? threads : worker_count());
    });
}

tm_status tm_run_arc(const char* dir, int rollout_budget, double timeout_sec, uint64_t seed,
                     int threads, const char* out_dir, int* tasks_run, int* skipped) {
    return guarded([&] {
        require(dir && out_dir, "dir and out_dir must be non-null");
        ArcOptions opts;
        opts.rollout_budget = rollout_budget;
        opts.timeout_sec = timeout_sec;
        opts.seed = seed;
        opts.threads = threads > 0 ? threads : worker_count();
        const auto report = run_arc_experiment(dir, opts, out_dir);
        if (tasks_run) *tasks_run = static_cast<int>(report.outcomes.size());
        if (skipped) *skipped = static_cast<int>(report.skipped.size());
    });
}

tm_status tm_make_tables(const char* results_csv, const char* out_dir) {
    return guarded([&] {
        require(results_csv && out_dir, "paths must be non-null");
        make_tables(results_csv, out_dir);
    });
}

}  // extern "C"
