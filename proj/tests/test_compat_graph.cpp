#include <doctest.h>

#include <bit>
#include <cmath>
#include <random>

#include "topomcts/compat_graph.hpp"
#include "topomcts/error.hpp"
#include "topomcts/mcts.hpp"
#include "topomcts/task_suite.hpp"

using namespace topomcts;

namespace {

GridTask blank(int rows, int cols, int k, std::vector<int> codes) {
    std::vector<std::optional<Color>> cells;
    for (int v : codes) cells.push_back(v < 0 ? std::nullopt : std::optional<Color>(v));
    return GridTask(rows, cols, k, std::move(cells));
}

// All completions of the unfilled cells (small grids only).
template <typename F>
void for_each_completion(const GridTask& t, F&& visit) {
    const auto missing = t.missing_cells();
    std::vector<int> grid = t.codes();
    std::vector<int> digits(missing.size(), 0);
    for (;;) {
        for (std::size_t i = 0; i < missing.size(); ++i) grid[t.index(missing[i])] = digits[i];
        visit(grid);
        std::size_t p = 0;
        while (p < digits.size() && ++digits[p] == t.alphabet_size()) digits[p++] = 0;
        if (p == digits.size()) return;
    }
}

bool symmetric_under(const std::vector<int>& g, int n, Transform tr) {
    for (int i = 0; i < n * n; ++i) {
        const Cell c = apply_transform(tr, {i / n, i % n}, n, n);
        if (g[i] != g[c.row * n + c.col]) return false;
    }
    return true;
}

void check_rebuild_along_playouts(const GridTask& start, const PatternRule& rule, std::mt19937_64& rng) {
    GridTask state = start;
    CompatGraph graph = build_compat_graph(state, rule);
    while (state.missing_count() > 1 && !graph.empty()) {
        std::uniform_int_distribution<std::size_t> pick(0, graph.node_count() - 1);
        const GraphNode nd = graph.node(pick(rng));
        const Assignment a{nd.cell, nd.color};
        CompatGraph next = incremental_update(graph, state, a);
        state = apply_assignment(state, a);
        const CompatGraph scratch = build_compat_graph(state, rule);
        REQUIRE(next == scratch);
        graph = std::move(next);
    }
}

}  // namespace

TEST_CASE("spatial graph is complete multipartite") {
    const auto t = blank(3, 3, 4, {0, -1, 1, -1, 2, -1, 3, -1, 0});
    const auto g = build_compat_graph(t, SpatialPattern{});
    const std::size_t x = 4;
    const std::size_t k = 4;
    CHECK(g.node_count() == x * k);
    CHECK(g.edge_count() == k * k * x * (x - 1) / 2);
    for (std::size_t u = 0; u < g.node_count(); ++u) {
        CHECK(g.weight(u, u) == 0.0);
        for (std::size_t v = 0; v < g.node_count(); ++v) {
            const bool same_cell = g.node(u).cell == g.node(v).cell;
            CHECK(g.weight(u, v) == (same_cell ? 0.0 : 1.0));
        }
    }
}

TEST_CASE("opposite cells under 180 degree symmetry") {
    const auto t = blank(3, 3, 3, {-1, 1, 2, 0, 1, 0, 2, 1, -1});
    const auto g = build_compat_graph(t, RotationalSymmetry{180});
    const Cell i{0, 0};
    const Cell j{2, 2};
    for (int k = 0; k < 3; ++k) {
        for (int l = 0; l < 3; ++l) {
            const auto u = g.find_node(i, k);
            const auto v = g.find_node(j, l);
            REQUIRE(u);
            REQUIRE(v);
            CHECK(g.weight(*u, *v) == (k == l ? 1.0 : 0.0));
        }
    }
}

TEST_CASE("one unfilled cell gives no edges") {
    for (const PatternRule& rule : {PatternRule{SpatialPattern{}}, PatternRule{ColorFrequency{}},
                                    PatternRule{RotationalSymmetry{90}}}) {
        const auto g = build_compat_graph(blank(2, 2, 3, {0, 1, -1, 2}), rule);
        CHECK(g.edge_count() == 0);
    }
}

TEST_CASE("no missing cells is an error") {
    try {
        build_compat_graph(blank(1, 2, 2, {0, 1}), SpatialPattern{});
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NoMissingCells);
    }
}

TEST_CASE("assignment propagates to the opposite cell") {
    const auto t = blank(3, 3, 3, {-1, 1, 2, 0, 1, 0, 2, 1, -1});
    const auto g = build_compat_graph(t, RotationalSymmetry{180});
    CHECK(valid_colors(g, {2, 2}).size() == 3);
    const auto child = incremental_update(g, t, {{0, 0}, 2});
    CHECK(valid_colors(child, {2, 2}) == std::vector<Color>{2});
    CHECK_FALSE(child.is_free({0, 0}));
    try {
        valid_colors(child, {0, 0});
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::CellNotInGraph);
    }
}

TEST_CASE("spatial assignment only removes the assigned cell") {
    const auto t = blank(2, 2, 3, {-1, -1, -1, 0});
    const auto g = build_compat_graph(t, SpatialPattern{});
    const auto child = incremental_update(g, t, {{0, 1}, 1});
    CHECK(child.node_count() == g.node_count() - 3);
    CHECK(valid_colors(child, {0, 0}).size() == 3);
    CHECK(child == build_compat_graph(apply_assignment(t, {{0, 1}, 1}), SpatialPattern{}));
}

TEST_CASE("last unfilled cell leaves no candidates") {
    const auto t = blank(2, 2, 3, {-1, 2, 1, 0});
    const auto g = build_compat_graph(t, SpatialPattern{});
    const auto child = incremental_update(g, t, {{0, 0}, 2});
    CHECK(child.empty());
    CHECK(child.edge_count() == 0);
}

TEST_CASE("invalid assignments are rejected") {
    const auto t = blank(3, 3, 3, {-1, 1, 2, 0, 1, 0, 2, 1, 0});
    const auto g = build_compat_graph(t, RotationalSymmetry{180});
    for (Assignment a : {Assignment{{0, 0}, 1}, Assignment{{0, 1}, 1}, Assignment{{5, 5}, 0}}) {
        try {
            incremental_update(g, t, a);
            FAIL("expected throw");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::InvalidAssignment);
        }
    }
}

TEST_CASE("symmetry domains equal the brute-force completion oracle") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 150; ++trial) {
        const int n = 2 + trial % 2;
        const int k = 3;
        const Transform tr = kDetectionOrder[trial % 7];
        std::vector<int> codes(static_cast<std::size_t>(n * n));
        std::uniform_int_distribution<int> color(-2, k - 1);
        for (auto& v : codes) v = std::max(-1, color(rng));
        if (std::count(codes.begin(), codes.end(), -1) == 0) codes[0] = -1;
        const auto t = blank(n, n, k, codes);
        const auto g = build_compat_graph(t, rule_of(tr));
        std::vector<ColorMask> reach(static_cast<std::size_t>(n * n), 0);
        bool any = false;
        for_each_completion(t, [&](const std::vector<int>& full) {
            if (!symmetric_under(full, n, tr)) return;
            any = true;
            for (int i = 0; i < n * n; ++i) reach[i] |= ColorMask{1} << full[i];
        });
        // Domains are per orbit; a conflict elsewhere empties the global oracle.
        if (!any) continue;
        for (const Cell c : t.missing_cells()) CHECK(g.domain(c) == reach[t.index(c)]);
    }
}

TEST_CASE("progression domains keep every consistent completion") {
    std::mt19937_64 rng(5);
    int checked = 0;
    for (int trial = 0; trial < 400 && checked < 60; ++trial) {
        const int k = 4;
        std::vector<int> codes(9);
        std::uniform_int_distribution<int> color(-1, k - 1);
        for (auto& v : codes) v = color(rng);
        const auto t = blank(3, 3, k, codes);
        if (t.missing_count() == 0 || t.missing_count() > 5 || !has_arithmetic_progression(t)) continue;
        ++checked;
        const auto g = build_compat_graph(t, ArithmeticProgression{});
        // Any completion whose every row and column is a progression must survive.
        for_each_completion(t, [&](const std::vector<int>& full) {
            auto line_ok = [&](int a, int b, int c) { return full[b] - full[a] == full[c] - full[b]; };
            for (int r = 0; r < 3; ++r) {
                if (!line_ok(3 * r, 3 * r + 1, 3 * r + 2)) return;
            }
            for (int c = 0; c < 3; ++c) {
                if (!line_ok(c, c + 3, c + 6)) return;
            }
            for (const Cell c : t.missing_cells()) {
                CHECK(((g.domain(c) >> full[t.index(c)]) & 1u) == 1u);
            }
            for (const Cell a : t.missing_cells()) {
                for (const Cell b : t.missing_cells()) {
                    if (a == b) continue;
                    const auto u = g.find_node(a, full[t.index(a)]);
                    const auto v = g.find_node(b, full[t.index(b)]);
                    CHECK(g.weight(*u, *v) > 0.0);
                }
            }
        });
    }
    CHECK(checked > 20);
}

TEST_CASE("colour frequency weights follow the balance rule") {
    // 9 cells, K = 3: balanced count 3, cap 4, floor 2.
    const auto t = blank(3, 3, 3, {0, 0, 0, 0, 1, 1, -1, -1, -1});
    const auto g = build_compat_graph(t, ColorFrequency{});
    CHECK(g.node_count() == 9);
    auto w = [&](Cell a, Color k, Cell b, Color l) { return g.weight(*g.find_node(a, k), *g.find_node(b, l)); };
    CHECK(w({2, 0}, 0, {2, 1}, 1) == 0.5);  // colour 0 would reach 5
    CHECK(w({2, 0}, 1, {2, 1}, 2) == 1.0);  // counts 4,3,1 with one cell left to lift colour 2
    CHECK(w({2, 0}, 1, {2, 1}, 1) == 0.5);  // colour 2 can no longer reach 2
    CHECK(w({2, 0}, 2, {2, 1}, 2) == 1.0);
    for (std::size_t u = 0; u < g.node_count(); ++u) {
        for (std::size_t v = 0; v < g.node_count(); ++v) {
            CHECK(g.weight(u, v) == g.weight(v, u));
            if (g.node(u).cell == g.node(v).cell) CHECK(g.weight(u, v) == 0.0);
        }
    }
}

TEST_CASE("incremental update equals rebuild on suite playouts") {
    std::mt19937_64 rng(17);
    const auto suite = build_suite(SuiteConfig::uniform(4), 9);
    for (int round = 0; round < 3; ++round) {
        for (const auto& t : suite) check_rebuild_along_playouts(t.task, detect_pattern(t.task), rng);
    }
}

TEST_CASE("incremental update equals rebuild on larger random grids") {
    std::mt19937_64 rng(23);
    const std::vector<PatternRule> rules{RotationalSymmetry{90}, ReflectiveSymmetry{Axis::Diagonal},
                                         ColorFrequency{}, ArithmeticProgression{}, SpatialPattern{}};
    for (int trial = 0; trial < 60; ++trial) {
        const int n = 4 + trial % 2;
        std::vector<int> codes(static_cast<std::size_t>(n * n));
        std::uniform_int_distribution<int> color(-2, 3);
        for (auto& v : codes) v = std::max(-1, color(rng));
        if (std::count(codes.begin(), codes.end(), -1) < 2) codes[0] = codes[1] = -1;
        for (const auto& rule : rules) check_rebuild_along_playouts(blank(n, n, 4, codes), rule, rng);
    }
}

TEST_CASE("from_edges validation and canonical order") {
    const std::vector<GraphNode> nodes{{{0, 1}, 0}, {{0, 0}, 1}, {{0, 0}, 0}};
    const auto g = CompatGraph::from_edges(1, 2, 2, SpatialPattern{}, nodes, {{0, 2, 0.5}});
    CHECK(g.node(0) == GraphNode{{0, 0}, 0});
    CHECK(g.weight(*g.find_node({0, 0}, 0), *g.find_node({0, 1}, 0)) == 0.5);
    CHECK(g.edge_count() == 1);
    CHECK(g.dump_csv() == "0,0,0,0,1,0,0.5\n");
    CHECK_THROWS_AS(CompatGraph::from_edges(1, 2, 2, SpatialPattern{}, nodes, {{1, 2, 1.0}}), Error);
    CHECK_THROWS_AS(CompatGraph::from_edges(1, 2, 2, SpatialPattern{}, nodes, {{0, 1, 1.5}}), Error);
}
