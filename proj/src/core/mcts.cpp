#include "topomcts/mcts.hpp"

#include <bit>
#include <cmath>
#include <string>

#include "topomcts/error.hpp"

namespace topomcts {

const char* to_string(SelectionMode mode) noexcept {
    switch (mode) {
        case SelectionMode::Vanilla: return "vanilla";
        case SelectionMode::GridTopoControl: return "grid_topology";
        case SelectionMode::Lambda2Only: return "lambda2_only";
        case SelectionMode::RigidityOnly: return "rigidity_only";
        case SelectionMode::Full: return "full";
    }
    return "?";
}

SelectionMode parse_mode(std::string_view name) {
    for (auto m : kAllModes) {
        if (name == to_string(m)) return m;
    }
    throw Error(ErrorCode::InvalidArgument, "unknown selection mode '" + std::string(name) + "'");
}

void SelectionParams::validate() const {
    if (!(c >= 0.0)) throw Error(ErrorCode::InvalidArgument, "exploration constant must be >= 0");
    if (!(epsilon > 0.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must be positive");
    if (!std::isfinite(beta) || !std::isfinite(weights.w_lambda) || !std::isfinite(weights.w_r) ||
        !std::isfinite(weights.w_sigma)) {
        throw Error(ErrorCode::InvalidArgument, "selection weights must be finite");
    }
}

FeatureWeights SelectionParams::effective_weights() const {
    switch (mode) {
        case SelectionMode::Lambda2Only: return {1.0, 0.0, 0.0};
        case SelectionMode::RigidityOnly: return {0.0, 1.0, 0.0};
        default: return weights;
    }
}

// --- Rng -------------------------------------------------------------------

std::uint64_t Rng::mix(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t Rng::hash(std::string_view text) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

Rng::Rng(std::uint64_t seed, std::uint64_t stream)
    : seed_(mix(mix(seed) ^ mix(stream + 0x632be59bd9b4e019ULL))), engine_(seed_) {}

int Rng::below(int bound) {
    if (bound <= 0) throw Error(ErrorCode::InvalidArgument, "bound must be positive");
    // Rejection sampling keeps the result independent of library distributions.
    const std::uint64_t range = static_cast<std::uint64_t>(bound);
    const std::uint64_t limit = std::mt19937_64::max() - std::mt19937_64::max() % range;
    std::uint64_t x;
    do {
        x = engine_();
    } while (x >= limit);
    return static_cast<int>(x % range);
}

Rng Rng::split(std::uint64_t stream_id) { return Rng(engine_(), stream_id); }

// --- tree ------------------------------------------------------------------

namespace {

std::vector<Assignment> actions_of(const GridTask& state, const CompatGraph& graph) {
    std::vector<Assignment> out;
    if (state.missing_count() == 0) return out;
    out.reserve(graph.node_count());
    for (const auto& nd : graph.nodes()) out.push_back({nd.cell, nd.color});
    return out;
}

std::unique_ptr<SearchNode> make_node(GridTask state, CompatGraph graph) {
    auto node = std::unique_ptr<SearchNode>(
        new SearchNode{std::move(state), std::move(graph), std::nullopt, {}, 0.0, 0, {}, {}, {}, 0});
    node->untried = actions_of(node->state, node->graph);
    return node;
}

std::unique_ptr<SearchNode> make_child(const SearchNode& parent, Assignment a) {
    GridTask state = apply_assignment(parent.state, a);
    CompatGraph graph;
    if (state.missing_count() > 0) graph = incremental_update(parent.graph, parent.state, a);
    auto child = make_node(std::move(state), std::move(graph));
    child->action = a;
    return child;
}

}  // namespace

std::unique_ptr<SearchNode> make_root(const GridTask& task, const PatternRule& rule) {
    CompatGraph graph;
    if (task.missing_count() > 0) graph = build_compat_graph(task, rule);
    return make_node(task, std::move(graph));
}

std::vector<double> selection_scores(const SearchNode& node, const SelectionParams& params) {
    if (node.children.empty()) throw Error(ErrorCode::NoChildren, "node has no children");
    const std::size_t count = node.children.size();
    std::vector<double> bonus(count, 0.0);
    if (params.uses_features()) {
        std::vector<double> f(count);
        for (std::size_t i = 0; i < count; ++i) {
            if (!node.children[i]->f) {
                throw Error(ErrorCode::InvalidArgument, "child feature not computed");
            }
            f[i] = *node.children[i]->f;
        }
        bonus = sibling_normalize(f, params.epsilon);
    }
    const double log_n = node.n > 0 ? std::log(static_cast<double>(node.n)) : 0.0;
    std::vector<double> scores(count);
    for (std::size_t i = 0; i < count; ++i) {
        const SearchNode& child = *node.children[i];
        const double explore = params.c * std::sqrt(log_n / (child.n + 1.0));
        scores[i] = child.q + explore;
        if (params.uses_features()) scores[i] += params.beta * bonus[i];
    }
    return scores;
}

std::size_t select_child(const SearchNode& node, const SelectionParams& params) {
    const auto scores = selection_scores(node, params);
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i) {
        if (scores[i] > scores[best]) best = i;
    }
    return best;
}

double reward_of(const GridTask& task, std::span<const Color> completed) {
    const auto& truth = task.ground_truth();
    if (completed.size() != truth.size()) {
        throw Error(ErrorCode::ShapeMismatch, "completed grid has the wrong size");
    }
    std::size_t match = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) match += completed[i] == truth[i];
    return static_cast<double>(match) / static_cast<double>(truth.size());
}

double rollout(const GridTask& state, const CompatGraph& graph, Rng& rng,
               std::vector<Color>& completed) {
    completed = state.codes();
    if (state.missing_count() > 0) {
        const auto& rule = graph.rule();
        const auto fam = family_of(rule);
        const bool propagates = fam == PatternFamily::Rotational ||
                                fam == PatternFamily::Reflective ||
                                fam == PatternFamily::ArithmeticProgression;
        std::vector<ColorMask> dom = graph.domains();
        GridTask partial = state;
        for (int i = 0; i < state.size(); ++i) {
            if (state.at(i)) continue;
            const ColorMask mask = dom[i];
            Color color;
            if (mask == 0) {
                color = rng.below(state.alphabet_size());
            } else {
                int pick = rng.below(std::popcount(mask));
                ColorMask m = mask;
                while (pick-- > 0) m &= m - 1;
                color = std::countr_zero(m);
            }
            completed[i] = color;
            if (propagates) {
                partial = apply_assignment(partial, {state.cell_at(i), color});
                dom[i] = 0;
                propagate_domains(partial, rule, dom);
            }
        }
    }
    return reward_of(state, completed);
}

double rollout(const GridTask& state, const CompatGraph& graph, Rng& rng) {
    std::vector<Color> completed;
    return rollout(state, graph, rng, completed);
}

void backpropagate(std::span<SearchNode* const> path, double reward) {
    for (SearchNode* node : path) {
        node->n += 1;
        node->q += (reward - node->q) / node->n;
    }
}

namespace {

class SearchEngine {
public:
    SearchEngine(const PatternRule& rule, const SelectionParams& params, const SearchOptions& opts,
                 const GridTask& task)
        : rule_(rule), params_(params), opts_(opts), weights_(params.effective_weights()) {
        if (params.mode == SelectionMode::GridTopoControl) {
            grid_feature_ = grid_laplacian_lambda2(task);
        }
    }

    void ensure_features(SearchNode& parent) {
        if (!params_.uses_features()) return;
        for (auto& child : parent.children) {
            if (child->f) continue;
            if (params_.mode == SelectionMode::GridTopoControl) {
                child->f = grid_feature_;
                continue;
            }
            const Eigen::VectorXd* warm = nullptr;
            Eigen::VectorXd mapped;
            if (parent.fiedler.size() > 0 && !child->terminal()) {
                mapped = restrict_to(parent.graph, parent.fiedler, child->graph);
                warm = &mapped;
            }
            auto features = composite_feature(child->graph, child->state, weights_, opts_.eigen, warm);
            child->f = features.composite_f;
            child->fiedler = std::move(features.fiedler);
        }
    }

private:
    PatternRule rule_;
    SelectionParams params_;
    SearchOptions opts_;
    FeatureWeights weights_;
    double grid_feature_ = 0.0;
};

}  // namespace

SearchResult run_search(const GridTask& task, const PatternRule& rule,
                        const SelectionParams& params, const SearchOptions& options) {
    params.validate();
    if (options.iterations < 1) throw Error(ErrorCode::InvalidArgument, "iterations must be >= 1");
    if (!task.has_ground_truth()) {
        throw Error(ErrorCode::InvalidArgument, "search reward needs a ground-truth grid");
    }
    const auto started = std::chrono::steady_clock::now();
    SearchResult result(task);
    std::vector<Color> completed = task.codes();

    if (task.missing_count() == 0) {
        result.reward = reward_of(task, completed);
        result.solved = result.reward == 1.0;
        if (result.solved) result.rollouts_to_solution = 0;
        result.wall_time = std::chrono::steady_clock::now() - started;
        return result;
    }

    Rng rng(options.seed, options.stream);
    SearchEngine engine(rule, params, options, task);
    auto root = make_root(task, rule);
    result.reward = -1.0;

    std::vector<SearchNode*> path;
    for (int it = 1; it <= options.iterations; ++it) {
        if (options.time_limit &&
            std::chrono::steady_clock::now() - started > *options.time_limit) {
            result.timed_out = true;
            break;
        }
        result.iterations_used = it;
        path.clear();
        SearchNode* node = root.get();
        path.push_back(node);
        while (!node->terminal() && node->fully_expanded() && !node->children.empty()) {
            engine.ensure_features(*node);
            const std::size_t idx = select_child(*node, params);
            result.selection_trace.push_back(static_cast<std::uint32_t>(idx));
            node = node->children[idx].get();
            path.push_back(node);
        }
        if (!node->terminal() && !node->fully_expanded()) {
            const Assignment a = node->untried[node->next_untried++];
            node->children.push_back(make_child(*node, a));
            ++result.nodes_expanded;
            result.expansion_trace.push_back(a);
            node = node->children.back().get();
            path.push_back(node);
        }
        const double reward = rollout(node->state, node->graph, rng, completed);
        backpropagate(path, reward);
        if (reward > result.reward) {
            result.reward = reward;
            result.best_grid = GridTask(task.rows(), task.cols(), task.alphabet_size(),
                                        {completed.begin(), completed.end()});
        }
        if (reward == 1.0) {
            result.solved = true;
            result.rollouts_to_solution = it;
            break;
        }
    }
    if (result.reward < 0.0) result.reward = 0.0;
    result.wall_time = std::chrono::steady_clock::now() - started;
    return result;
}

}  // namespace topomcts
