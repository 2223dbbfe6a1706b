#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "topomcts/grid.hpp"
#include "topomcts/pattern.hpp"

namespace topomcts {

struct SyntheticSpec {
    PatternRule rule = RotationalSymmetry{180};
    int rows = 3;
    int cols = 3;
    int alphabet_size = 5;
    int num_missing = 1;
    std::uint64_t generator_seed = 0;
};

/// Complete grid satisfying the rule, then `num_missing` blanked cells, such
/// that the detector recovers the rule family on the blanked grid and every
/// ground-truth colour survives compatibility pruning under the detected rule.
/// Deterministic in the generator seed. Throws InfeasibleSpec.
GridTask generate_task(const SyntheticSpec& spec);

struct SuiteTask {
    std::string id;
    PatternRule rule;  // generating rule
    GridTask task;
};

/// Tasks per family, in PatternFamily order.
struct SuiteConfig {
    std::array<int, 5> counts{12, 12, 12, 6, 6};
    int rows = 3;
    int cols = 3;
    int alphabet_size = 5;
    int min_missing = 1;
    int max_missing = 5;

    static SuiteConfig uniform(int per_type);
    int total() const;
};

/// Stable order: family by family, index within family.
std::vector<SuiteTask> build_suite(const SuiteConfig& config, std::uint64_t seed);
std::vector<SuiteTask> build_suite(int count_per_type, std::uint64_t seed);

struct ArcTask {
    std::vector<std::pair<GridTask, GridTask>> train_pairs;
    GridTask test_input;
    GridTask truth_output;
};

inline constexpr int kArcPalette = 10;

/// Public ARC schema: {"train":[{"input","output"}...],"test":[{"input","output"}...]}.
/// The first test pair is used. Throws MalformedDocument, ColorOutOfRange.
ArcTask load_arc_task(const nlohmann::json& document);
ArcTask load_arc_task_file(const std::filesystem::path& path);

struct GameTask {
    GridTask task;
    PatternRule rule;
};

/// Cell-filling game: the truth output with cells that differ from the test
/// input blanked, and the majority rule family over the train outputs.
/// Throws ShapeChangeUnsupported.
GameTask arc_to_game(const ArcTask& arc);

/// Writes the suite as one grid-task JSON document per task plus an index.
void write_suite(const std::vector<SuiteTask>& suite, const std::filesystem::path& dir);

}  // namespace topomcts
