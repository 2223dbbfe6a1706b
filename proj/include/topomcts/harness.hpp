#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "topomcts/mcts.hpp"
#include "topomcts/task_suite.hpp"

namespace topomcts {

inline constexpr const char* kCsvHeader =
    "method,task_id,pattern,seed,solved,reward,nodes_expanded,wall_ms,rollouts_to_solution,"
    "lambda2_cg,lambda2_grid,max_rigidity,color_stdev";

struct RunRecord {
    SelectionMode method = SelectionMode::Full;
    std::string task_id;
    PatternFamily pattern = PatternFamily::Spatial;
    std::uint64_t seed = 0;
    bool solved = false;
    double reward = 0.0;
    int nodes_expanded = 0;
    double wall_ms = 0.0;
    std::optional<int> rollouts_to_solution;
    double lambda2_cg = 0.0;
    double lambda2_grid = 0.0;
    double max_rigidity = 0.0;
    double color_stdev = 0.0;
};

std::string to_csv_row(const RunRecord& r);
/// Writes header plus rows. Throws IOFailure.
void write_csv(const std::filesystem::path& path, const std::vector<RunRecord>& records);
/// Throws SchemaMismatch (wrong header, malformed row, no rows) or IOFailure.
std::vector<RunRecord> read_csv(const std::filesystem::path& path);
std::vector<RunRecord> parse_csv(const std::string& text);

/// Mean with normal-approximation 95% half-width, 1.96 * sd / sqrt(n), sample sd.
struct Stat {
    double mean = 0.0;
    double half_width = 0.0;
    int n = 0;
};
Stat mean_ci(const std::vector<double>& values);

struct AggregateRow {
    std::string group;
    int runs = 0;
    std::vector<std::pair<std::string, Stat>> metrics;  // in table column order

    const Stat& metric(const std::string& name) const;
};

/// One row per method present, in ablation-arm order. Per-seed means over
/// tasks first, then the CI across seeds. Columns: success_pct, nodes_expanded,
/// wall_ms, overhead (mean wall time over the Vanilla mean), reward.
std::vector<AggregateRow> aggregate_by_method(const std::vector<RunRecord>& records);

/// One row per pattern family present, CI across rows. Columns: lambda2_cg,
/// lambda2_grid, max_rigidity, color_stdev.
std::vector<AggregateRow> aggregate_by_family(const std::vector<RunRecord>& records);

void write_aggregate_csv(const std::filesystem::path& path, const std::vector<AggregateRow>& rows);
std::string format_table(const std::string& title, const std::vector<AggregateRow>& rows);

/// Worker count: hardware concurrency capped by TOPOMCTS_THREADS when set.
int worker_count();

/// Runs fn(0..n-1) on up to `threads` workers. The first exception thrown is
/// rethrown after all workers finish.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

struct DetectionSummary {
    int correct = 0;
    int total = 0;
    std::vector<std::string> mismatches;  // task ids
};

DetectionSummary run_detection_experiment(const SuiteConfig& config, std::uint64_t seed,
                                          const std::filesystem::path& out_dir);

struct AblationOptions {
    std::vector<std::uint64_t> seeds{0, 1, 2, 3};
    int iterations = 100;
    SelectionParams params;  // mode is overridden per arm
    int threads = 1;
};

struct AblationResult {
    std::vector<RunRecord> records;  // (task, seed, method) order
    std::vector<AggregateRow> rows;
};

/// All five arms over every task and seed. Throws InvariantViolation when the
/// Vanilla and grid-control arms diverge on any (task, seed).
AblationResult run_ablation(const std::vector<SuiteTask>& suite, const AblationOptions& options);
AblationResult run_ablation(const SuiteConfig& config, const AblationOptions& options,
                            std::uint64_t suite_seed, const std::filesystem::path& out_dir);

struct FeatureStudy {
    std::vector<RunRecord> records;
    std::vector<AggregateRow> rows;
};

/// Root-state features for every task (detected rule), aggregated per family.
FeatureStudy run_feature_study(const std::vector<SuiteTask>& suite, int threads = 1);
FeatureStudy run_feature_study(const SuiteConfig& config, std::uint64_t seed,
                               const std::filesystem::path& out_dir, int threads = 1);

struct NamedGame {
    std::string id;
    GameTask game;
};

struct ArcOptions {
    int rollout_budget = 1000;
    double timeout_sec = 30.0;
    std::uint64_t seed = 0;
    int threads = 1;
};

struct ArcOutcome {
    std::string id;
    int missing = 0;
    PatternFamily pattern = PatternFamily::Spatial;
    RunRecord topo;      // Full
    RunRecord baseline;  // Vanilla
    /// baseline / topo rollouts to solution; empty unless both solved.
    std::optional<double> ratio;
};

std::vector<ArcOutcome> compare_arms(const std::vector<NamedGame>& games, const ArcOptions& options);

struct ArcGroup {
    std::string label;  // "<=5", "6-20", ">20"
    int tasks = 0;
    int both_solved = 0;
    double mean_ratio = 0.0;  // over tasks solved by both arms
    double mean_topo_rollouts = 0.0;
    double mean_baseline_rollouts = 0.0;
};

std::vector<ArcGroup> group_outcomes(const std::vector<ArcOutcome>& outcomes);

struct ArcReport {
    std::vector<ArcOutcome> outcomes;
    std::vector<ArcGroup> groups;
    std::vector<std::pair<std::string, std::string>> skipped;  // file, reason
};

/// Runs every *.json ARC task in `dir` (sorted by name). Throws NoTasksFound.
ArcReport run_arc_experiment(const std::filesystem::path& dir, const ArcOptions& options,
                             const std::filesystem::path& out_dir);

/// Reads a raw CSV and writes method and family tables (CSV and text).
void make_tables(const std::filesystem::path& results, const std::filesystem::path& out_dir);

}  // namespace topomcts
