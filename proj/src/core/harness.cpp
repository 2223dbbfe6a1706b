#include "topomcts/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "topomcts/error.hpp"

namespace topomcts {

namespace fs = std::filesystem;

// --- CSV -------------------------------------------------------------------

std::string to_csv_row(const RunRecord& r) {
    return fmt::format("{},{},{},{},{},{},{},{:.6f},{},{},{},{},{}", to_string(r.method), r.task_id,
                       to_string(r.pattern), r.seed, r.solved ? 1 : 0, r.reward, r.nodes_expanded,
                       r.wall_ms,
                       r.rollouts_to_solution ? std::to_string(*r.rollouts_to_solution) : "",
                       r.lambda2_cg, r.lambda2_grid, r.max_rigidity, r.color_stdev);
}

namespace {

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IOFailure, "cannot open " + path.string() + " for writing");
    return out;
}

void finish(std::ofstream& out, const fs::path& path) {
    out.flush();
    if (!out) throw Error(ErrorCode::IOFailure, "write failed for " + path.string());
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw Error(ErrorCode::IOFailure, "cannot create directory " + dir.string());
    }
}

void write_text(const fs::path& path, const std::string& text) {
    auto out = open_out(path);
    out << text;
    finish(out, path);
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(sep, start);
        out.push_back(line.substr(start, pos - start));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return out;
}

template <typename T>
T parse_number(const std::string& field, std::size_t line) {
    T value{};
    const auto* end = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(field.data(), end, value);
    if (ec != std::errc{} || ptr != end) {
        throw Error(ErrorCode::SchemaMismatch,
                    fmt::format("line {}: cannot parse '{}' as a number", line, field));
    }
    return value;
}

}  // namespace

void write_csv(const fs::path& path, const std::vector<RunRecord>& records) {
    auto out = open_out(path);
    out << kCsvHeader << '\n';
    for (const auto& r : records) out << to_csv_row(r) << '\n';
    finish(out, path);
}

std::vector<RunRecord> parse_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::SchemaMismatch, "empty results file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kCsvHeader) throw Error(ErrorCode::SchemaMismatch, "unexpected CSV header");
    std::vector<RunRecord> records;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto f = split(line, ',');
        if (f.size() != 13) {
            throw Error(ErrorCode::SchemaMismatch, fmt::format("line {}: expected 13 fields", lineno));
        }
        RunRecord r;
        try {
            r.method = parse_mode(f[0]);
            r.pattern = parse_family(f[2]);
        } catch (const Error& e) {
            throw Error(ErrorCode::SchemaMismatch, fmt::format("line {}: {}", lineno, e.what()));
        }
        r.task_id = f[1];
        r.seed = parse_number<std::uint64_t>(f[3], lineno);
        const int solved = parse_number<int>(f[4], lineno);
        if (solved != 0 && solved != 1) {
            throw Error(ErrorCode::SchemaMismatch, fmt::format("line {}: solved must be 0/1", lineno));
        }
        r.solved = solved == 1;
        r.reward = parse_number<double>(f[5], lineno);
        r.nodes_expanded = parse_number<int>(f[6], lineno);
        r.wall_ms = parse_number<double>(f[7], lineno);
        if (!f[8].empty()) r.rollouts_to_solution = parse_number<int>(f[8], lineno);
        r.lambda2_cg = parse_number<double>(f[9], lineno);
        r.lambda2_grid = parse_number<double>(f[10], lineno);
        r.max_rigidity = parse_number<double>(f[11], lineno);
        r.color_stdev = parse_number<double>(f[12], lineno);
        if (r.reward < 0.0 || r.reward > 1.0 || r.wall_ms < 0.0) {
            throw Error(ErrorCode::SchemaMismatch, fmt::format("line {}: value out of range", lineno));
        }
        records.push_back(std::move(r));
    }
    if (records.empty()) throw Error(ErrorCode::SchemaMismatch, "results file has no rows");
    return records;
}

std::vector<RunRecord> read_csv(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IOFailure, "cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_csv(buf.str());
}

// --- aggregates ------------------------------------------------------------

Stat mean_ci(const std::vector<double>& values) {
    Stat s;
    s.n = static_cast<int>(values.size());
    if (values.empty()) return s;
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / s.n;
    if (s.n > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        s.half_width = 1.96 * std::sqrt(ss / (s.n - 1)) / std::sqrt(static_cast<double>(s.n));
    }
    return s;
}

const Stat& AggregateRow::metric(const std::string& name) const {
    for (const auto& [key, stat] : metrics) {
        if (key == name) return stat;
    }
    throw Error(ErrorCode::InvalidArgument, "no metric '" + name + "'");
}

std::vector<AggregateRow> aggregate_by_method(const std::vector<RunRecord>& records) {
    struct Acc {
        double solved = 0, nodes = 0, ms = 0, reward = 0;
        int count = 0;
    };
    std::map<SelectionMode, std::map<std::uint64_t, Acc>> by;
    std::map<SelectionMode, int> runs;
    for (const auto& r : records) {
        auto& a = by[r.method][r.seed];
        a.solved += r.solved ? 100.0 : 0.0;
        a.nodes += r.nodes_expanded;
        a.ms += r.wall_ms;
        a.reward += r.reward;
        ++a.count;
        ++runs[r.method];
    }
    std::optional<double> vanilla_ms;
    std::map<SelectionMode, double> mean_ms;
    for (const auto& [mode, seeds] : by) {
        double total = 0.0;
        int n = 0;
        for (const auto& [seed, a] : seeds) {
            total += a.ms;
            n += a.count;
        }
        mean_ms[mode] = total / n;
        if (mode == SelectionMode::Vanilla) vanilla_ms = total / n;
    }

    std::vector<AggregateRow> rows;
    for (SelectionMode mode : kAllModes) {
        auto it = by.find(mode);
        if (it == by.end()) continue;
        std::vector<double> solved, nodes, ms, reward;
        for (const auto& [seed, a] : it->second) {
            solved.push_back(a.solved / a.count);
            nodes.push_back(a.nodes / a.count);
            ms.push_back(a.ms / a.count);
            reward.push_back(a.reward / a.count);
        }
        AggregateRow row;
        row.group = to_string(mode);
        row.runs = runs[mode];
        row.metrics = {{"success_pct", mean_ci(solved)},
                       {"nodes_expanded", mean_ci(nodes)},
                       {"wall_ms", mean_ci(ms)}};
        if (vanilla_ms && *vanilla_ms > 0.0) {
            Stat overhead;
            overhead.mean = mean_ms[mode] / *vanilla_ms;
            overhead.n = static_cast<int>(solved.size());
            row.metrics.emplace_back("overhead", overhead);
        }
        row.metrics.emplace_back("reward", mean_ci(reward));
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<AggregateRow> aggregate_by_family(const std::vector<RunRecord>& records) {
    std::map<PatternFamily, std::array<std::vector<double>, 4>> by;
    for (const auto& r : records) {
        auto& cols = by[r.pattern];
        cols[0].push_back(r.lambda2_cg);
        cols[1].push_back(r.lambda2_grid);
        cols[2].push_back(r.max_rigidity);
        cols[3].push_back(r.color_stdev);
    }
    std::vector<AggregateRow> rows;
    for (PatternFamily fam : kAllFamilies) {
        auto it = by.find(fam);
        if (it == by.end()) continue;
        AggregateRow row;
        row.group = to_string(fam);
        row.runs = static_cast<int>(it->second[0].size());
        row.metrics = {{"lambda2_cg", mean_ci(it->second[0])},
                       {"lambda2_grid", mean_ci(it->second[1])},
                       {"max_rigidity", mean_ci(it->second[2])},
                       {"color_stdev", mean_ci(it->second[3])}};
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_aggregate_csv(const fs::path& path, const std::vector<AggregateRow>& rows) {
    auto out = open_out(path);
    out << "group,runs";
    if (!rows.empty()) {
        for (const auto& [name, stat] : rows.front().metrics) out << ',' << name << ',' << name << "_ci";
    }
    out << '\n';
    for (const auto& row : rows) {
        out << row.group << ',' << row.runs;
        for (const auto& [name, stat] : row.metrics) {
            out << fmt::format(",{},{}", stat.mean, stat.half_width);
        }
        out << '\n';
    }
    finish(out, path);
}

std::string format_table(const std::string& title, const std::vector<AggregateRow>& rows) {
    std::vector<std::vector<std::string>> cells;
    std::vector<std::string> header{"group", "runs"};
    if (!rows.empty()) {
        for (const auto& [name, stat] : rows.front().metrics) header.push_back(name);
    }
    cells.push_back(header);
    for (const auto& row : rows) {
        std::vector<std::string> line{row.group, std::to_string(row.runs)};
        for (const auto& [name, stat] : row.metrics) {
            line.push_back(name == "overhead" ? fmt::format("{:.2f}x", stat.mean)
                                              : fmt::format("{:.3f} +/- {:.3f}", stat.mean,
                                                            stat.half_width));
        }
        cells.push_back(std::move(line));
    }
    std::vector<std::size_t> width(header.size(), 0);
    for (const auto& line : cells) {
        for (std::size_t i = 0; i < line.size() && i < width.size(); ++i) {
            width[i] = std::max(width[i], line[i].size());
        }
    }
    std::string out = title + "\n";
    for (std::size_t l = 0; l < cells.size(); ++l) {
        std::string text;
        for (std::size_t i = 0; i < cells[l].size() && i < width.size(); ++i) {
            if (i > 0) text += "  ";
            text += i == 0 ? fmt::format("{:<{}}", cells[l][i], width[i])
                           : fmt::format("{:>{}}", cells[l][i], width[i]);
        }
        while (!text.empty() && text.back() == ' ') text.pop_back();
        out += text + "\n";
        if (l == 0) {
            std::size_t total = 0;
            for (auto w : width) total += w;
            out += std::string(total + 2 * (width.size() - 1), '-') + "\n";
        }
    }
    return out;
}

// --- workers ---------------------------------------------------------------

int worker_count() {
    int n = static_cast<int>(std::thread::hardware_concurrency());
    if (n < 1) n = 1;
    if (const char* env = std::getenv("TOPOMCTS_THREADS")) {
        int cap = 0;
        const std::string s(env);
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), cap);
        if (ec == std::errc{} && ptr == s.data() + s.size() && cap >= 1) n = std::min(n, cap);
    }
    return n;
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
    const auto workers = static_cast<std::size_t>(std::max(1, threads));
    if (workers == 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::mutex mu;
    std::size_t next = 0;
    std::exception_ptr failure;
    auto work = [&] {
        for (;;) {
            std::size_t i;
            {
                std::lock_guard lock(mu);
                if (failure || next >= n) return;
                i = next++;
            }
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(mu);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < std::min(workers, n); ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

// --- experiments -----------------------------------------------------------

namespace {

struct RootFeatures {
    double lambda2_cg = 0.0;
    double lambda2_grid = 0.0;
    double max_rigidity = 0.0;
    double color_stdev = 0.0;
};

RootFeatures root_features(const GridTask& task, const PatternRule& rule) {
    RootFeatures out;
    out.lambda2_grid = grid_laplacian_lambda2(task);
    if (task.missing_count() == 0) return out;
    const auto graph = build_compat_graph(task, rule);
    const auto f = composite_feature(graph, task, FeatureWeights{});
    out.lambda2_cg = f.lambda2;
    out.max_rigidity = f.max_rigidity;
    out.color_stdev = f.color_count_stdev;
    return out;
}

void fill_features(RunRecord& r, const RootFeatures& f) {
    r.lambda2_cg = f.lambda2_cg;
    r.lambda2_grid = f.lambda2_grid;
    r.max_rigidity = f.max_rigidity;
    r.color_stdev = f.color_stdev;
}

RunRecord record_of(SelectionMode mode, const std::string& id, PatternFamily pattern,
                    std::uint64_t seed, const SearchResult& res) {
    RunRecord r;
    r.method = mode;
    r.task_id = id;
    r.pattern = pattern;
    r.seed = seed;
    r.solved = res.solved;
    r.reward = res.reward;
    r.nodes_expanded = res.nodes_expanded;
    r.wall_ms = std::chrono::duration<double, std::milli>(res.wall_time).count();
    r.rollouts_to_solution = res.rollouts_to_solution;
    return r;
}

void check_suite(const SuiteConfig& config) {
    if (config.total() < 1) throw Error(ErrorCode::InvalidArgument, "suite configuration is empty");
}

}  // namespace

DetectionSummary run_detection_experiment(const SuiteConfig& config, std::uint64_t seed,
                                          const fs::path& out_dir) {
    check_suite(config);
    const auto suite = build_suite(config, seed);
    DetectionSummary summary;
    std::vector<RunRecord> records;
    std::string detail = "task_id,generating_rule,detected_rule,correct\n";
    for (const auto& t : suite) {
        const auto started = std::chrono::steady_clock::now();
        const PatternRule detected = detect_pattern(t.task);
        const double ms = std::chrono::duration<double, std::milli>(
                              std::chrono::steady_clock::now() - started)
                              .count();
        const bool correct = family_of(detected) == family_of(t.rule);
        summary.correct += correct;
        ++summary.total;
        if (!correct) summary.mismatches.push_back(t.id);
        RunRecord r;
        r.method = SelectionMode::Full;
        r.task_id = t.id;
        r.pattern = family_of(t.rule);
        r.seed = seed;
        r.solved = correct;
        r.reward = correct ? 1.0 : 0.0;
        r.wall_ms = ms;
        r.lambda2_grid = grid_laplacian_lambda2(t.task);
        records.push_back(r);
        detail += fmt::format("{},{},{},{}\n", t.id, to_string(t.rule), to_string(detected),
                              correct ? 1 : 0);
    }
    ensure_dir(out_dir);
    write_csv(out_dir / "detection.csv", records);
    write_text(out_dir / "detection_detail.csv", detail);
    write_text(out_dir / "detection_summary.txt",
               fmt::format("tasks {}\ncorrect {}\nrate {:.2f}%\n", summary.total, summary.correct,
                           100.0 * summary.correct / summary.total));
    return summary;
}

AblationResult run_ablation(const std::vector<SuiteTask>& suite, const AblationOptions& options) {
    if (options.seeds.empty()) throw Error(ErrorCode::InvalidArgument, "at least one seed is required");
    if (options.iterations < 1) throw Error(ErrorCode::InvalidArgument, "iterations must be >= 1");
    options.params.validate();

    struct Prepared {
        PatternRule rule;
        RootFeatures features;
    };
    std::vector<Prepared> prepared(suite.size());
    parallel_for(suite.size(), options.threads, [&](std::size_t i) {
        const PatternRule rule = detect_pattern(suite[i].task);
        prepared[i] = {rule, root_features(suite[i].task, rule)};
    });

    constexpr std::size_t kArms = std::size(kAllModes);
    const std::size_t jobs = suite.size() * options.seeds.size();
    std::vector<RunRecord> records(jobs * kArms);
    parallel_for(jobs, options.threads, [&](std::size_t job) {
        const std::size_t ti = job / options.seeds.size();
        const std::uint64_t seed = options.seeds[job % options.seeds.size()];
        const SuiteTask& t = suite[ti];
        std::optional<SearchResult> vanilla;
        for (std::size_t a = 0; a < kArms; ++a) {
            SelectionParams params = options.params;
            params.mode = kAllModes[a];
            SearchOptions so;
            so.iterations = options.iterations;
            so.seed = seed;
            so.stream = Rng::hash(t.id);
            auto res = run_search(t.task, prepared[ti].rule, params, so);
            RunRecord r = record_of(params.mode, t.id, family_of(t.rule), seed, res);
            fill_features(r, prepared[ti].features);
            records[job * kArms + a] = std::move(r);
            if (params.mode == SelectionMode::Vanilla) {
                vanilla.emplace(std::move(res));
            } else if (params.mode == SelectionMode::GridTopoControl) {
                if (!vanilla || vanilla->expansion_trace != res.expansion_trace ||
                    vanilla->selection_trace != res.selection_trace ||
                    vanilla->solved != res.solved) {
                    throw Error(ErrorCode::InvariantViolation,
                                fmt::format("grid control diverged from vanilla on {} seed {}", t.id,
                                            seed));
                }
            }
        }
    });
    AblationResult result;
    result.rows = aggregate_by_method(records);
    result.records = std::move(records);
    return result;
}

AblationResult run_ablation(const SuiteConfig& config, const AblationOptions& options,
                            std::uint64_t suite_seed, const fs::path& out_dir) {
    check_suite(config);
    const auto suite = build_suite(config, suite_seed);
    auto result = run_ablation(suite, options);
    ensure_dir(out_dir);
    write_csv(out_dir / "ablation.csv", result.records);
    write_aggregate_csv(out_dir / "ablation_summary.csv", result.rows);
    write_text(out_dir / "ablation_table.txt", format_table("Ablation by method", result.rows));
    return result;
}

FeatureStudy run_feature_study(const std::vector<SuiteTask>& suite, int threads) {
    FeatureStudy study;
    study.records.resize(suite.size());
    parallel_for(suite.size(), threads, [&](std::size_t i) {
        const auto& t = suite[i];
        const auto started = std::chrono::steady_clock::now();
        const auto f = root_features(t.task, detect_pattern(t.task));
        RunRecord r;
        r.method = SelectionMode::Full;
        r.task_id = t.id;
        r.pattern = family_of(t.rule);
        r.wall_ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - started)
                        .count();
        fill_features(r, f);
        study.records[i] = std::move(r);
    });
    study.rows = aggregate_by_family(study.records);
    return study;
}

FeatureStudy run_feature_study(const SuiteConfig& config, std::uint64_t seed,
                               const fs::path& out_dir, int threads) {
    check_suite(config);
    auto study = run_feature_study(build_suite(config, seed), threads);
    for (auto& r : study.records) r.seed = seed;
    ensure_dir(out_dir);
    write_csv(out_dir / "features.csv", study.records);
    write_aggregate_csv(out_dir / "features_summary.csv", study.rows);
    write_text(out_dir / "features_table.txt", format_table("Root features by pattern", study.rows));
    return study;
}

std::vector<ArcOutcome> compare_arms(const std::vector<NamedGame>& games, const ArcOptions& options) {
    if (options.rollout_budget < 1) throw Error(ErrorCode::InvalidArgument, "rollout budget must be >= 1");
    if (!(options.timeout_sec > 0.0)) throw Error(ErrorCode::InvalidArgument, "timeout must be positive");
    std::vector<ArcOutcome> out(games.size());
    parallel_for(games.size(), options.threads, [&](std::size_t i) {
        const auto& g = games[i];
        const auto fam = family_of(g.game.rule);
        const auto features = root_features(g.game.task, g.game.rule);
        SearchOptions so;
        so.iterations = options.rollout_budget;
        so.seed = options.seed;
        so.stream = Rng::hash(g.id);
        so.time_limit = std::chrono::duration<double>(options.timeout_sec);
        SelectionParams params;
        ArcOutcome o;
        o.id = g.id;
        o.missing = g.game.task.missing_count();
        o.pattern = fam;
        params.mode = SelectionMode::Full;
        o.topo = record_of(params.mode, g.id, fam, options.seed,
                           run_search(g.game.task, g.game.rule, params, so));
        params.mode = SelectionMode::Vanilla;
        o.baseline = record_of(params.mode, g.id, fam, options.seed,
                               run_search(g.game.task, g.game.rule, params, so));
        fill_features(o.topo, features);
        fill_features(o.baseline, features);
        if (o.topo.rollouts_to_solution && o.baseline.rollouts_to_solution) {
            // Zero-missing tasks solve with zero rollouts; count them as parity.
            const double topo = std::max(1, *o.topo.rollouts_to_solution);
            const double base = std::max(1, *o.baseline.rollouts_to_solution);
            o.ratio = base / topo;
        }
        out[i] = std::move(o);
    });
    return out;
}

std::vector<ArcGroup> group_outcomes(const std::vector<ArcOutcome>& outcomes) {
    std::vector<ArcGroup> groups{{"<=5"}, {"6-20"}, {">20"}};
    std::array<double, 3> ratio{}, topo{}, base{};
    for (const auto& o : outcomes) {
        const std::size_t g = o.missing <= 5 ? 0 : o.missing <= 20 ? 1 : 2;
        ++groups[g].tasks;
        if (!o.ratio) continue;
        ++groups[g].both_solved;
        ratio[g] += *o.ratio;
        topo[g] += *o.topo.rollouts_to_solution;
        base[g] += *o.baseline.rollouts_to_solution;
    }
    for (std::size_t g = 0; g < groups.size(); ++g) {
        const int n = groups[g].both_solved;
        if (n == 0) continue;
        groups[g].mean_ratio = ratio[g] / n;
        groups[g].mean_topo_rollouts = topo[g] / n;
        groups[g].mean_baseline_rollouts = base[g] / n;
    }
    return groups;
}

namespace {

// Dense per-node graphs: bound memory on large ARC grids.
constexpr int kMaxArcGraphNodes = 256;

std::string arc_tasks_csv(const std::vector<ArcOutcome>& outcomes) {
    std::string s = "task_id,pattern,missing,topo_solved,topo_rollouts,baseline_solved,"
                    "baseline_rollouts,ratio\n";
    auto opt = [](const std::optional<int>& v) { return v ? std::to_string(*v) : std::string(); };
    for (const auto& o : outcomes) {
        s += fmt::format("{},{},{},{},{},{},{},{}\n", o.id, to_string(o.pattern), o.missing,
                         o.topo.solved ? 1 : 0, opt(o.topo.rollouts_to_solution),
                         o.baseline.solved ? 1 : 0, opt(o.baseline.rollouts_to_solution),
                         o.ratio ? fmt::format("{}", *o.ratio) : std::string());
    }
    return s;
}

std::string arc_groups_table(const std::vector<ArcGroup>& groups) {
    std::string s = fmt::format("{:<6}  {:>5}  {:>11}  {:>10}  {:>14}  {:>17}\n", "group", "tasks",
                                "both_solved", "mean_ratio", "topo_rollouts", "baseline_rollouts");
    s += std::string(6 + 5 + 11 + 10 + 14 + 17 + 10, '-') + "\n";
    for (const auto& g : groups) {
        s += fmt::format("{:<6}  {:>5}  {:>11}  {:>9.2f}x  {:>14.1f}  {:>17.1f}\n", g.label, g.tasks,
                         g.both_solved, g.mean_ratio, g.mean_topo_rollouts,
                         g.mean_baseline_rollouts);
    }
    return s;
}

}  // namespace

ArcReport run_arc_experiment(const fs::path& dir, const ArcOptions& options, const fs::path& out_dir) {
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) throw Error(ErrorCode::IOFailure, "not a directory: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir, ec)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
    }
    if (ec) throw Error(ErrorCode::IOFailure, "cannot list " + dir.string());
    std::sort(files.begin(), files.end());

    ArcReport report;
    std::vector<NamedGame> games;
    int parsed = 0;
    for (const auto& file : files) {
        const std::string name = file.filename().string();
        std::optional<ArcTask> arc;
        try {
            arc.emplace(load_arc_task_file(file));
        } catch (const Error& e) {
            if (e.code() == ErrorCode::IOFailure) throw;
            report.skipped.emplace_back(name, std::string("unparsable: ") + e.what());
            continue;
        }
        ++parsed;
        try {
            GameTask game = arc_to_game(*arc);
            const auto nodes = static_cast<long>(game.task.missing_count()) * game.task.alphabet_size();
            if (nodes > kMaxArcGraphNodes) {
                report.skipped.emplace_back(name, "compatibility graph too large");
                continue;
            }
            games.push_back({file.stem().string(), std::move(game)});
        } catch (const Error& e) {
            if (e.code() != ErrorCode::ShapeChangeUnsupported) throw;
            report.skipped.emplace_back(name, "shape change");
        }
    }
    if (parsed == 0) throw Error(ErrorCode::NoTasksFound, "no parsable ARC task in " + dir.string());

    report.outcomes = compare_arms(games, options);
    report.groups = group_outcomes(report.outcomes);

    ensure_dir(out_dir);
    std::vector<RunRecord> records;
    for (const auto& o : report.outcomes) {
        records.push_back(o.topo);
        records.push_back(o.baseline);
    }
    write_csv(out_dir / "arc.csv", records);
    write_text(out_dir / "arc_tasks.csv", arc_tasks_csv(report.outcomes));
    std::string groups_csv = "group,tasks,both_solved,mean_ratio,mean_topo_rollouts,mean_baseline_rollouts\n";
    for (const auto& g : report.groups) {
        groups_csv += fmt::format("{},{},{},{},{},{}\n", g.label, g.tasks, g.both_solved, g.mean_ratio,
                                  g.mean_topo_rollouts, g.mean_baseline_rollouts);
    }
    write_text(out_dir / "arc_groups.csv", groups_csv);
    write_text(out_dir / "arc_table.txt", arc_groups_table(report.groups));
    std::string skipped = "file,reason\n";
    for (const auto& [file, reason] : report.skipped) skipped += file + "," + reason + "\n";
    write_text(out_dir / "arc_skipped.csv", skipped);
    return report;
}

void make_tables(const fs::path& results, const fs::path& out_dir) {
    const auto records = read_csv(results);
    const auto methods = aggregate_by_method(records);
    const auto families = aggregate_by_family(records);
    ensure_dir(out_dir);
    write_aggregate_csv(out_dir / "methods_table.csv", methods);
    write_text(out_dir / "methods_table.txt", format_table("By method", methods));
    write_aggregate_csv(out_dir / "families_table.csv", families);
    write_text(out_dir / "families_table.txt", format_table("By pattern", families));
}

}  // namespace topomcts
