#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "topomcts/compat_graph.hpp"
#include "topomcts/grid.hpp"
#include "topomcts/pattern.hpp"
#include "topomcts/spectral.hpp"

namespace topomcts {

/// The five ablation arms.
enum class SelectionMode { Vanilla, GridTopoControl, Lambda2Only, RigidityOnly, Full };

inline constexpr SelectionMode kAllModes[] = {SelectionMode::Vanilla,
                                              SelectionMode::GridTopoControl,
                                              SelectionMode::Lambda2Only,
                                              SelectionMode::RigidityOnly, SelectionMode::Full};

const char* to_string(SelectionMode mode) noexcept;
SelectionMode parse_mode(std::string_view name);

struct SelectionParams {
    double c = 1.414;
    double beta = 0.5;
    FeatureWeights weights;
    double epsilon = 1e-6;
    SelectionMode mode = SelectionMode::Full;

    void validate() const;
    /// Weights actually in force: the single-feature arms pin them.
    FeatureWeights effective_weights() const;
    /// Whether selection reads the children's cached feature values.
    bool uses_features() const noexcept { return mode != SelectionMode::Vanilla; }
};

/// Seedable random stream. Streams for different (seed, stream id) pairs are
/// decorrelated through SplitMix64.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

    /// Uniform integer in [0, bound).
    int below(int bound);
    Rng split(std::uint64_t stream_id);
    std::mt19937_64& engine() noexcept { return engine_; }

    static std::uint64_t mix(std::uint64_t x) noexcept;
    static std::uint64_t hash(std::string_view text) noexcept;

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

struct SearchNode {
    GridTask state;
    CompatGraph graph;       // empty for terminal states
    std::optional<double> f; // cached composite (or grid-control) feature
    Eigen::VectorXd fiedler;
    double q = 0.0;
    int n = 0;
    std::vector<std::unique_ptr<SearchNode>> children;
    std::optional<Assignment> action;
    std::vector<Assignment> untried;  // remaining expansions in order
    std::size_t next_untried = 0;

    bool terminal() const noexcept { return state.missing_count() == 0; }
    bool fully_expanded() const noexcept { return next_untried >= untried.size(); }
};

/// Builds a node, its graph and its ordered action list (unfilled cells
/// row-major, colours ascending among valid colours).
std::unique_ptr<SearchNode> make_root(const GridTask& task, const PatternRule& rule);

/// Index of the child maximising Q + c*sqrt(ln N / (n + 1)) + beta * f~.
/// Children must carry cached features unless the mode is Vanilla. Ties go to
/// the lowest index. Throws NoChildren.
std::size_t select_child(const SearchNode& node, const SelectionParams& params);

/// Selection scores of every child, as used by select_child.
std::vector<double> selection_scores(const SearchNode& node, const SelectionParams& params);

/// Fills the unfilled cells uniformly among valid colours (full palette for
/// dead ends), propagating after each fill. Returns matching cells / total.
double rollout(const GridTask& state, const CompatGraph& graph, Rng& rng);
/// As rollout, also returning the completed grid's colours (row-major).
double rollout(const GridTask& state, const CompatGraph& graph, Rng& rng,
               std::vector<Color>& completed);

/// Cells of `completed` agreeing with the ground truth, over all cells.
double reward_of(const GridTask& task, std::span<const Color> completed);

/// N += 1 and running-mean update of Q on every node of the path.
void backpropagate(std::span<SearchNode* const> path, double reward);

struct SearchOptions {
    int iterations = 100;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
    std::optional<std::chrono::duration<double>> time_limit;
    EigenOptions eigen;
};

struct SearchResult {
    explicit SearchResult(GridTask start) : best_grid(std::move(start)) {}

    bool solved = false;
    GridTask best_grid;
    double reward = 0.0;
    int iterations_used = 0;
    int nodes_expanded = 0;
    std::chrono::duration<double> wall_time{0};
    std::optional<int> rollouts_to_solution;
    bool timed_out = false;
    /// Actions of created nodes, in creation order.
    std::vector<Assignment> expansion_trace;
    /// Child index chosen at every selection step, in order.
    std::vector<std::uint32_t> selection_trace;
};

/// MCTS with Topo-UCB selection. Stops at the first rollout of reward 1.
/// Requires ground truth. Deterministic for fixed options apart from wall time.
SearchResult run_search(const GridTask& task, const PatternRule& rule,
                        const SelectionParams& params, const SearchOptions& options);

}  // namespace topomcts
