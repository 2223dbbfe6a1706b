#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "topomcts/topomcts.h"

namespace {

constexpr int kExitInvariant = 2;
constexpr int kExitIO = 3;

int exit_code(tm_status status) {
    switch (status) {
        case TM_OK: return 0;
        case TM_ERR_INVARIANT_VIOLATION: return kExitInvariant;
        case TM_ERR_IO: return kExitIO;
        default: return 1;
    }
}

int report(tm_status status) {
    if (status != TM_OK) {
        std::cerr << "error: " << tm_status_name(status) << ": " << tm_last_error() << '\n';
    }
    return exit_code(status);
}

void print_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (in) std::cout << in.rdbuf();
}

tm_suite_config suite_config(const std::optional<int>& per_type) {
    tm_suite_config cfg;
    if (per_type) {
        tm_suite_config_uniform(&cfg, *per_type);
    } else {
        tm_suite_config_default(&cfg);
    }
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Topology-guided MCTS for grid completion tasks"};
    app.require_subcommand(1);
    int code = 0;

    std::optional<int> per_type;
    std::uint64_t seed = 0;
    std::string out;

    auto* detect = app.add_subcommand("detect", "Pattern detection accuracy on a synthetic suite");
    detect->add_option("--suite-per-type", per_type, "Tasks per pattern kind (default 12,12,12,6,6)")
        ->check(CLI::PositiveNumber);
    detect->add_option("--seed", seed, "Suite seed");
    detect->add_option("--out", out, "Output directory")->required();
    detect->callback([&] {
        const auto cfg = suite_config(per_type);
        int correct = 0;
        int total = 0;
        const auto st = tm_run_detection(&cfg, seed, out.c_str(), &correct, &total);
        if (st == TM_OK) std::cout << "detected " << correct << "/" << total << '\n';
        code = report(st);
    });

    std::vector<std::uint64_t> seeds{0, 1, 2, 3};
    int iters = 100;
    std::uint64_t suite_seed = 0;
    auto* ablate = app.add_subcommand("ablate", "Five-arm selection ablation");
    ablate->add_option("--suite-per-type", per_type, "Tasks per pattern kind (default 12,12,12,6,6)")
        ->check(CLI::PositiveNumber);
    ablate->add_option("--seeds", seeds, "Comma-separated search seeds")->delimiter(',');
    ablate->add_option("--iters", iters, "MCTS iterations per run")->check(CLI::PositiveNumber);
    ablate->add_option("--suite-seed", suite_seed, "Suite seed");
    ablate->add_option("--out", out, "Output directory")->required();
    ablate->callback([&] {
        const auto cfg = suite_config(per_type);
        const auto st = tm_run_ablation(&cfg, suite_seed, seeds.data(), seeds.size(), iters,
                                        tm_worker_count(), out.c_str());
        if (st == TM_OK) print_file(std::filesystem::path(out) / "ablation_table.txt");
        code = report(st);
    });

    auto* features = app.add_subcommand("features", "Root topological features per pattern kind");
    features->add_option("--suite-per-type", per_type, "Tasks per pattern kind (default 12,12,12,6,6)")
        ->check(CLI::PositiveNumber);
    features->add_option("--seed", seed, "Suite seed");
    features->add_option("--out", out, "Output directory")->required();
    features->callback([&] {
        const auto cfg = suite_config(per_type);
        const auto st = tm_run_features(&cfg, seed, tm_worker_count(), out.c_str());
        if (st == TM_OK) print_file(std::filesystem::path(out) / "features_table.txt");
        code = report(st);
    });

    std::string dir;
    int budget = 1000;
    double timeout = 30.0;
    auto* arc = app.add_subcommand("arc", "Full versus vanilla search on ARC task files");
    arc->add_option("--dir", dir, "Directory of ARC JSON files")->required();
    arc->add_option("--rollout-budget", budget, "Rollouts per search")->check(CLI::PositiveNumber);
    arc->add_option("--timeout-sec", timeout, "Wall-clock limit per search")->check(CLI::PositiveNumber);
    arc->add_option("--seed", seed, "Search seed");
    arc->add_option("--out", out, "Output directory")->required();
    arc->callback([&] {
        int ran = 0;
        int skipped = 0;
        const auto st = tm_run_arc(dir.c_str(), budget, timeout, seed, tm_worker_count(), out.c_str(),
                                   &ran, &skipped);
        if (st == TM_OK) {
            std::cout << "tasks run " << ran << ", skipped " << skipped << '\n';
            print_file(std::filesystem::path(out) / "arc_table.txt");
        }
        code = report(st);
    });

    std::string results;
    auto* tables = app.add_subcommand("tables", "Aggregate tables from a raw results CSV");
    tables->add_option("--results", results, "Raw results CSV")->required();
    tables->add_option("--out", out, "Output directory")->required();
    tables->callback([&] {
        const auto st = tm_make_tables(results.c_str(), out.c_str());
        if (st == TM_OK) {
            print_file(std::filesystem::path(out) / "methods_table.txt");
            std::cout << '\n';
            print_file(std::filesystem::path(out) / "families_table.txt");
        }
        code = report(st);
    });

    CLI11_PARSE(app, argc, argv);
    return code;
}
