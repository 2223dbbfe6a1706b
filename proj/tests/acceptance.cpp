// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <fmt/core.h>

#include "topomcts/error.hpp"
#include "topomcts/harness.hpp"
#include "topomcts/spectral.hpp"

using namespace topomcts;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

constexpr std::uint64_t kSuiteSeed = 0;
const std::vector<std::uint64_t> kSeeds{0, 1, 2, 3};

const std::vector<SuiteTask>& default_suite() {
    static const auto suite = build_suite(SuiteConfig{}, kSuiteSeed);
    return suite;
}

SearchOptions search_options(const SuiteTask& t, std::uint64_t seed) {
    SearchOptions o;
    o.iterations = 100;
    o.seed = seed;
    o.stream = Rng::hash(t.id);
    return o;
}

Outcome detection() {
    int correct = 0;
    std::string wrong;
    for (const auto& t : default_suite()) {
        if (family_of(detect_pattern(t.task)) == family_of(t.rule)) {
            ++correct;
        } else {
            wrong += " " + t.id;
        }
    }
    const int total = static_cast<int>(default_suite().size());
    return {correct == 48 && total == 48, fmt::format("{}/{} recovered{}", correct, total, wrong)};
}

Outcome grid_invariance() {
    const auto& suite = default_suite();
    const double first = grid_laplacian_lambda2(suite.front().task);
    int identical = 0;
    for (const auto& t : suite) identical += grid_laplacian_lambda2(t.task) == first;

    int same_traces = 0;
    int runs = 0;
    for (const auto& t : suite) {
        const auto rule = detect_pattern(t.task);
        for (std::uint64_t seed : kSeeds) {
            SelectionParams p;
            p.mode = SelectionMode::Vanilla;
            const auto v = run_search(t.task, rule, p, search_options(t, seed));
            p.mode = SelectionMode::GridTopoControl;
            const auto g = run_search(t.task, rule, p, search_options(t, seed));
            ++runs;
            same_traces += v.expansion_trace == g.expansion_trace && v.selection_trace == g.selection_trace &&
                           v.solved == g.solved && v.reward == g.reward;
        }
    }
    const bool pass = identical == static_cast<int>(suite.size()) && same_traces == runs;
    return {pass, fmt::format("grid lambda2 {} identical on {}/{} tasks; traces equal on {}/{} runs", first,
                              identical, suite.size(), same_traces, runs)};
}

Outcome feature_ordering() {
    const auto study = run_feature_study(default_suite(), worker_count());
    std::map<std::string, double> mean;
    for (const auto& row : study.rows) mean[row.group] = row.metric("lambda2_cg").mean;
    const double rot = mean["rotational_symmetry"];
    const double refl = mean["reflective_symmetry"];
    const double spatial = mean["spatial_pattern"];
    bool pass = rot > refl;
    for (const auto& [group, m] : mean) {
        if (group != "spatial_pattern") pass = pass && m > spatial;
    }
    // Shifted-data variance; exact zero when every value is identical.
    const double ref = study.records.front().lambda2_grid;
    double s1 = 0.0;
    double s2 = 0.0;
    for (const auto& r : study.records) {
        s1 += r.lambda2_grid - ref;
        s2 += (r.lambda2_grid - ref) * (r.lambda2_grid - ref);
    }
    const double count = static_cast<double>(study.records.size());
    const double grid_var = (s2 - s1 * s1 / count) / count;
    pass = pass && grid_var == 0.0;
    std::string detail;
    for (const auto& row : study.rows) detail += fmt::format("{}={:.3f} ", row.group, mean[row.group]);
    detail += fmt::format("grid_var={}", grid_var);
    return {pass, detail};
}

Outcome ablation() {
    AblationOptions opts;
    opts.seeds = kSeeds;
    opts.iterations = 100;
    opts.threads = worker_count();
    AblationResult res = [&] {
        try {
            return run_ablation(default_suite(), opts);
        } catch (const Error& e) {
            return AblationResult{};
        }
    }();
    if (res.rows.size() != 5) return {false, "ablation aborted (grid control diverged from vanilla)"};
    auto row = [&](SelectionMode m) -> const AggregateRow& {
        return *std::find_if(res.rows.begin(), res.rows.end(),
                             [&](const AggregateRow& r) { return r.group == to_string(m); });
    };
    const double v = row(SelectionMode::Vanilla).metric("success_pct").mean;
    const double g = row(SelectionMode::GridTopoControl).metric("success_pct").mean;
    const double l = row(SelectionMode::Lambda2Only).metric("success_pct").mean;
    const double f = row(SelectionMode::Full).metric("success_pct").mean;
    const double nodes_v = row(SelectionMode::Vanilla).metric("nodes_expanded").mean;
    const double nodes_f = row(SelectionMode::Full).metric("nodes_expanded").mean;
    const double overhead = row(SelectionMode::Full).metric("overhead").mean;
    const bool full_ok = f >= v + 3.0;
    const bool l2_ok = l >= v + 2.0;
    const bool ctrl_ok = g == v;
    const bool nodes_ok = nodes_f <= nodes_v;
    const bool overhead_ok = overhead <= 1.5;
    return {full_ok && l2_ok && ctrl_ok && nodes_ok && overhead_ok,
            fmt::format("success vanilla {:.2f} grid {:.2f} lambda2 {:.2f} full {:.2f} [full+3:{} lambda2+2:{} "
                        "control:{}]; nodes full {:.2f} vs vanilla {:.2f} [{}]; overhead {:.2f}x [{}]",
                        v, g, l, f, full_ok ? "ok" : "miss", l2_ok ? "ok" : "miss", ctrl_ok ? "ok" : "miss",
                        nodes_f, nodes_v, nodes_ok ? "ok" : "miss", overhead, overhead_ok ? "ok" : "miss")};
}

CompatGraph strip_graph(int n, const std::vector<CompatGraph::Edge>& edges) {
    std::vector<GraphNode> nodes;
    for (int i = 0; i < n; ++i) nodes.push_back({{0, i}, 0});
    return CompatGraph::from_edges(1, n, 2, SpatialPattern{}, nodes, edges);
}

Outcome spectral_oracle() {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> size(2, 64);
    std::uniform_real_distribution<double> density(0.05, 0.9);
    std::uniform_real_distribution<double> weight(0.05, 1.0);
    double worst = 0.0;
    double worst_row = 0.0;
    for (int g = 0; g < 200; ++g) {
        const int n = size(rng);
        std::bernoulli_distribution coin(density(rng));
        std::vector<CompatGraph::Edge> edges;
        for (int u = 0; u < n; ++u) {
            for (int v = u + 1; v < n; ++v) {
                if (coin(rng)) edges.push_back({static_cast<std::size_t>(u), static_cast<std::size_t>(v), weight(rng)});
            }
        }
        const auto graph = strip_graph(n, edges);
        const Eigen::MatrixXd lap = weighted_laplacian(graph);
        worst_row = std::max(worst_row, lap.rowwise().sum().cwiseAbs().maxCoeff());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(lap, Eigen::EigenvaluesOnly);
        EigenOptions opts;
        opts.force_iterative = true;
        opts.tol = 1e-10;
        opts.max_iterations = 2000;
        const double it = lambda2(graph, opts).value;
        worst = std::max(worst, std::abs(it - es.eigenvalues()(1)));
    }
    std::vector<CompatGraph::Edge> k4;
    for (std::size_t u = 0; u < 4; ++u) {
        for (std::size_t v = u + 1; v < 4; ++v) k4.push_back({u, v, 1.0});
    }
    const double k4_dense = lambda2(strip_graph(4, k4)).value;
    EigenOptions it_opts;
    it_opts.force_iterative = true;
    const double k4_it = lambda2(strip_graph(4, k4), it_opts).value;
    const auto split = strip_graph(6, {{0, 1, 1.0}, {1, 2, 1.0}, {3, 4, 1.0}, {4, 5, 0.5}});
    const double disc = lambda2(split).value;
    const double disc_it = lambda2(split, it_opts).value;
    const bool pass = worst <= 1e-6 && std::abs(k4_dense - 4.0) <= 1e-9 && std::abs(k4_it - 4.0) <= 1e-9 &&
                      std::abs(disc) <= 1e-9 && std::abs(disc_it) <= 1e-9 && worst_row <= 1e-12;
    return {pass, fmt::format("max |iterative-dense| {:.3g} over 200 graphs; K4 {} / {}; disconnected {:.3g} / {:.3g}; "
                              "max |row sum| {:.3g}",
                              worst, k4_dense, k4_it, disc, disc_it, worst_row)};
}

Outcome incremental_oracle() {
    const auto& suite = default_suite();
    std::mt19937_64 rng(77);
    int steps = 0;
    int mismatches = 0;
    for (int p = 0; p < 100; ++p) {
        const auto& t = suite[static_cast<std::size_t>(p) % suite.size()];
        const auto rule = detect_pattern(t.task);
        GridTask state = t.task;
        CompatGraph graph = build_compat_graph(state, rule);
        while (state.missing_count() > 0) {
            std::vector<Assignment> moves;
            for (const Cell c : state.missing_cells()) {
                for (Color k : valid_colors(graph, c)) moves.push_back({c, k});
            }
            if (moves.empty()) break;
            const Assignment a = moves[std::uniform_int_distribution<std::size_t>(0, moves.size() - 1)(rng)];
            const CompatGraph inc = incremental_update(graph, state, a);
            state = apply_assignment(state, a);
            ++steps;
            if (state.missing_count() == 0) {
                // Nothing to rebuild from: the completed state has no candidates.
                mismatches += !(inc.empty() && inc.edge_count() == 0);
                break;
            }
            graph = build_compat_graph(state, rule);
            if (!(inc == graph)) ++mismatches;
        }
    }
    return {mismatches == 0 && steps > 0,
            fmt::format("{} incremental steps over 100 playouts, {} mismatches", steps, mismatches)};
}

Outcome normalisation() {
    std::mt19937_64 rng(99);
    std::uniform_int_distribution<int> len(1, 12);
    std::normal_distribution<double> value(0.0, 5.0);
    std::uniform_real_distribution<double> offset(-1e3, 1e3);
    double worst_mu = 0.0;
    for (int i = 0; i < 1000; ++i) {
        std::vector<double> v(static_cast<std::size_t>(len(rng)));
        const double base = offset(rng);
        for (auto& x : v) x = base + value(rng);
        const auto z = sibling_normalize(v);
        double mu = 0.0;
        for (double x : z) mu += x;
        worst_mu = std::max(worst_mu, std::abs(mu / static_cast<double>(z.size())));
    }

    auto make = [] {
        return make_root(GridTask::from_codes(2, {{0}}), SpatialPattern{});
    };
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> visits(0, 40);
    std::uniform_int_distribution<int> kids(2, 9);
    int agree = 0;
    for (int s = 0; s < 1000; ++s) {
        auto a = make();
        auto b = make();
        const double shift = offset(rng);
        const int k = kids(rng);
        int total = 1;
        for (int i = 0; i < k; ++i) {
            auto ca = make();
            ca->q = unit(rng);
            ca->n = visits(rng);
            ca->f = value(rng);
            total += ca->n;
            auto cb = make();
            cb->q = ca->q;
            cb->n = ca->n;
            cb->f = *ca->f + shift;
            a->children.push_back(std::move(ca));
            b->children.push_back(std::move(cb));
        }
        a->n = b->n = total;
        SelectionParams p;
        agree += select_child(*a, p) == select_child(*b, p);
    }
    return {worst_mu <= 1e-9 && agree == 1000,
            fmt::format("max |mean| {:.3g} over 1000 vectors; argmax unchanged in {}/1000 shifted scenarios",
                        worst_mu, agree)};
}

std::vector<NamedGame> symmetric_games(int size, const std::function<int(int)>& missing, std::uint64_t seed0) {
    std::vector<NamedGame> games;
    for (int i = 0; i < 20; ++i) {
        SyntheticSpec spec;
        spec.rule = rule_of(kDetectionOrder[std::array{1, 0, 3, 4, 5, 6}[static_cast<std::size_t>(i % 6)]]);
        spec.rows = spec.cols = size;
        spec.alphabet_size = 5;
        spec.num_missing = missing(i);
        spec.generator_seed = seed0 + static_cast<std::uint64_t>(i);
        const auto t = generate_task(spec);
        games.push_back({fmt::format("synthetic_{:02}", i), {t, detect_pattern(t)}});
    }
    return games;
}

Outcome arc_substitute() {
    ArcOptions opts;
    opts.rollout_budget = 2000;
    opts.timeout_sec = 30.0;
    opts.threads = worker_count();
    const auto large_games = symmetric_games(5, [](int i) { return 6 + i % 7; }, 1000);
    const auto small_games = symmetric_games(3, [](int i) { return 1 + i % 5; }, 1000);
    // Pairs solved by both arms, pooled over the search seeds.
    double topo = 0.0;
    double base = 0.0;
    int both = 0;
    std::vector<ArcOutcome> small;
    for (std::uint64_t seed : kSeeds) {
        opts.seed = seed;
        for (const auto& o : compare_arms(large_games, opts)) {
            if (!o.ratio) continue;
            ++both;
            topo += *o.topo.rollouts_to_solution;
            base += *o.baseline.rollouts_to_solution;
        }
        for (auto& o : compare_arms(small_games, opts)) small.push_back(std::move(o));
    }
    const bool large_ok = both > 0 && topo / both <= base / both;
    const auto groups = group_outcomes(small);
    const auto& g = groups.front();
    const bool small_ok = g.both_solved > 0 && g.mean_ratio >= 0.8 && g.mean_ratio <= 1.25;
    return {large_ok && small_ok,
            fmt::format("large: mean rollouts full {:.2f} vs vanilla {:.2f} over {} (task, seed) pairs solved by "
                        "both; small (<=5 missing): ratio {:.3f} over {} pairs",
                        both ? topo / both : 0.0, both ? base / both : 0.0, both, g.mean_ratio, g.both_solved)};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"1 detection accuracy", detection},
        {"2 grid-invariance control", grid_invariance},
        {"3 feature discrimination ordering", feature_ordering},
        {"4 ablation trend", ablation},
        {"5 spectral oracle", spectral_oracle},
        {"6 incremental-update oracle", incremental_oracle},
        {"7 normalisation properties", normalisation},
        {"8 synthetic ARC-style comparison", arc_substitute},
    };
    int failed = 0;
    for (const auto& [name, fn] : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, fmt::format("exception: {}", e.what())};
        }
        const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        failed += !o.pass;
        fmt::print("[{}] criterion {} ({:.1f}s): {}\n", o.pass ? "PASS" : "FAIL", name, sec, o.detail);
        std::fflush(stdout);
    }
    fmt::print("{} of {} criteria passed\n", criteria.size() - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
