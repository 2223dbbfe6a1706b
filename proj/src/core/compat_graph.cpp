#include "topomcts/compat_graph.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include <fmt/format.h>

#include "topomcts/error.hpp"

namespace topomcts {

namespace {

constexpr ColorMask bit(Color k) { return ColorMask{1} << k; }

constexpr int kApMinCells = 3;

// Constraint structure a rule induces on one partial grid.
class RuleModel {
public:
    RuleModel(const GridTask& task, const PatternRule& rule) : task_(task), rule_(rule) {
        switch (family_of(rule)) {
            case PatternFamily::Rotational:
            case PatternFamily::Reflective: init_orbits(transform_of(rule)); break;
            case PatternFamily::ArithmeticProgression: init_lines(); break;
            case PatternFamily::ColorFrequency: init_counts(); break;
            case PatternFamily::Spatial: break;
        }
    }

    void propagate(std::vector<ColorMask>& dom) {
        switch (family_of(rule_)) {
            case PatternFamily::Rotational:
            case PatternFamily::Reflective: propagate_orbits(dom); break;
            case PatternFamily::ArithmeticProgression: propagate_lines(dom); break;
            default: break;
        }
    }

    float weight(int i, Color k, int j, Color l) const {
        switch (family_of(rule_)) {
            case PatternFamily::Rotational:
            case PatternFamily::Reflective:
                return orbit_[i] != orbit_[j] || k == l ? 1.0f : 0.0f;
            case PatternFamily::ArithmeticProgression: return line_weight(i, k, j, l);
            case PatternFamily::ColorFrequency: return frequency_weight(k, l);
            case PatternFamily::Spatial: return 1.0f;
        }
        return 1.0f;
    }

    // Cells sharing a constrained line, as (line index) or -1.
    int shared_line(int i, int j) const {
        if (row_line_[i] >= 0 && row_line_[i] == row_line_[j]) return row_line_[i];
        if (col_line_[i] >= 0 && col_line_[i] == col_line_[j]) return col_line_[i];
        return -1;
    }

private:
    struct Line {
        std::vector<int> cells;  // in position order
        std::vector<std::pair<int, int>> candidates;  // (start, step)
    };

    // --- symmetry orbits -------------------------------------------------
    void init_orbits(Transform t) {
        if (requires_square(t) && task_.rows() != task_.cols()) {
            throw Error(ErrorCode::ShapeMismatch, "symmetry rule requires a square grid");
        }
        const int n = task_.size();
        orbit_.assign(static_cast<std::size_t>(n), -1);
        orbit_count_ = 0;
        for (int i = 0; i < n; ++i) {
            if (orbit_[i] >= 0) continue;
            int j = i;
            do {
                orbit_[j] = orbit_count_;
                j = task_.index(apply_transform(t, task_.cell_at(j), task_.rows(), task_.cols()));
            } while (orbit_[j] < 0);
            ++orbit_count_;
        }
    }

    void propagate_orbits(std::vector<ColorMask>& dom) const {
        std::vector<ColorMask> common(static_cast<std::size_t>(orbit_count_),
                                      full_mask(task_.alphabet_size()));
        for (int i = 0; i < task_.size(); ++i) {
            const auto v = task_.at(i);
            common[orbit_[i]] &= v ? bit(*v) : dom[i];
        }
        for (int i = 0; i < task_.size(); ++i) {
            if (!task_.at(i)) dom[i] = common[orbit_[i]];
        }
    }

    // --- arithmetic progression lines -------------------------------------
    void init_lines() {
        const int n = task_.size();
        row_line_.assign(static_cast<std::size_t>(n), -1);
        col_line_.assign(static_cast<std::size_t>(n), -1);
        bool rows_on = false;
        bool cols_on = false;
        for (int r = 0; r < task_.rows() && !rows_on; ++r) {
            rows_on = line_has_progression(task_, true, r, kApMinCells);
        }
        for (int c = 0; c < task_.cols() && !cols_on; ++c) {
            cols_on = line_has_progression(task_, false, c, kApMinCells);
        }
        auto add_line = [&](std::vector<int> cells, std::vector<int>& owner) {
            Line line;
            line.cells = std::move(cells);
            line.candidates = fitting_progressions(line.cells, nullptr);
            if (line.candidates.empty()) return;  // filled cells contradict any progression
            const int id = static_cast<int>(lines_.size());
            for (int c : line.cells) owner[c] = id;
            lines_.push_back(std::move(line));
        };
        if (rows_on) {
            for (int r = 0; r < task_.rows(); ++r) {
                std::vector<int> cells;
                for (int c = 0; c < task_.cols(); ++c) cells.push_back(r * task_.cols() + c);
                add_line(std::move(cells), row_line_);
            }
        }
        if (cols_on) {
            for (int c = 0; c < task_.cols(); ++c) {
                std::vector<int> cells;
                for (int r = 0; r < task_.rows(); ++r) cells.push_back(r * task_.cols() + c);
                add_line(std::move(cells), col_line_);
            }
        }
    }

    // Progressions (start, step) that stay inside [0, K) along the whole line,
    // match its filled cells and, when `dom` is given, the unfilled domains.
    std::vector<std::pair<int, int>> fitting_progressions(const std::vector<int>& cells,
                                                          const std::vector<ColorMask>* dom) const {
        const int k = task_.alphabet_size();
        const int len = static_cast<int>(cells.size());
        std::vector<std::pair<int, int>> out;
        for (int step = -(k - 1); step <= k - 1; ++step) {
            for (int start = 0; start < k; ++start) {
                const int last = start + step * (len - 1);
                if (last < 0 || last >= k) continue;
                bool ok = true;
                for (int t = 0; t < len && ok; ++t) {
                    const int v = start + step * t;
                    const auto filled = task_.at(cells[t]);
                    if (filled) {
                        ok = *filled == v;
                    } else if (dom) {
                        ok = ((*dom)[cells[t]] & bit(v)) != 0;
                    }
                }
                if (ok) out.emplace_back(start, step);
            }
        }
        return out;
    }

    void propagate_lines(std::vector<ColorMask>& dom) {
        bool changed = true;
        while (changed) {
            changed = false;
            for (auto& line : lines_) {
                line.candidates = fitting_progressions(line.cells, &dom);
                for (std::size_t t = 0; t < line.cells.size(); ++t) {
                    const int c = line.cells[t];
                    if (task_.at(c)) continue;
                    ColorMask reach = 0;
                    for (const auto& [start, step] : line.candidates) {
                        reach |= bit(start + step * static_cast<int>(t));
                    }
                    if ((dom[c] & reach) != dom[c]) {
                        dom[c] &= reach;
                        changed = true;
                    }
                }
            }
        }
    }

    float line_weight(int i, Color k, int j, Color l) const {
        const int id = shared_line(i, j);
        if (id < 0) return 1.0f;
        const Line& line = lines_[id];
        const auto ti = static_cast<int>(std::find(line.cells.begin(), line.cells.end(), i) -
                                         line.cells.begin());
        const auto tj = static_cast<int>(std::find(line.cells.begin(), line.cells.end(), j) -
                                         line.cells.begin());
        for (const auto& [start, step] : line.candidates) {
            if (start + step * ti == k && start + step * tj == l) return 1.0f;
        }
        return 0.0f;
    }

    // --- colour frequency --------------------------------------------------
    void init_counts() {
        counts_.assign(static_cast<std::size_t>(task_.alphabet_size()), 0);
        for (int i = 0; i < task_.size(); ++i) {
            if (auto v = task_.at(i)) ++counts_[*v];
        }
        const double balanced = static_cast<double>(task_.size()) / task_.alphabet_size();
        cap_ = static_cast<int>(std::floor(balanced + 1.0 + 1e-9));
        need_ = std::max(0, static_cast<int>(std::ceil(balanced - 1.0 - 1e-9)));
    }

    // 1 when the pair keeps every projected count under the cap and the cells
    // left afterwards can still lift every colour to the floor; else 0.5.
    float frequency_weight(Color k, Color l) const {
        int deficit = 0;
        for (int c = 0; c < static_cast<int>(counts_.size()); ++c) {
            const int projected = counts_[c] + (c == k) + (c == l);
            if (projected > cap_) return 0.5f;
            deficit += std::max(0, need_ - projected);
        }
        return deficit <= task_.missing_count() - 2 ? 1.0f : 0.5f;
    }

    const GridTask& task_;
    PatternRule rule_;
    std::vector<int> orbit_;
    int orbit_count_ = 0;
    std::vector<Line> lines_;
    std::vector<int> row_line_;
    std::vector<int> col_line_;
    std::vector<int> counts_;
    int cap_ = 0;
    int need_ = 0;
};

}  // namespace

std::vector<ColorMask> initial_domains(const GridTask& task) {
    std::vector<ColorMask> dom(static_cast<std::size_t>(task.size()), 0);
    const ColorMask all = full_mask(task.alphabet_size());
    for (int i = 0; i < task.size(); ++i) {
        if (!task.at(i)) dom[i] = all;
    }
    return dom;
}

void propagate_domains(const GridTask& task, const PatternRule& rule,
                       std::vector<ColorMask>& domains) {
    if (domains.size() != static_cast<std::size_t>(task.size())) {
        throw Error(ErrorCode::ShapeMismatch, "domain vector does not match grid");
    }
    RuleModel(task, rule).propagate(domains);
}

CompatGraph CompatGraph::from_edges(int rows, int cols, int alphabet_size, PatternRule rule,
                                    std::vector<GraphNode> nodes, const std::vector<Edge>& edges) {
    if (rows < 1 || cols < 1 || alphabet_size < 1 || alphabet_size > kMaxAlphabet) {
        throw Error(ErrorCode::InvalidArgument, "invalid graph shape or alphabet");
    }
    CompatGraph g;
    g.rows_ = rows;
    g.cols_ = cols;
    g.alphabet_size_ = alphabet_size;
    g.rule_ = std::move(rule);
    g.domains_.assign(static_cast<std::size_t>(rows * cols), 0);
    g.free_.assign(static_cast<std::size_t>(rows * cols), 0);
    for (const auto& nd : nodes) {
        if (nd.cell.row < 0 || nd.cell.row >= rows || nd.cell.col < 0 || nd.cell.col >= cols ||
            nd.color < 0 || nd.color >= alphabet_size) {
            throw Error(ErrorCode::InvalidArgument, "node outside grid or alphabet");
        }
        const auto idx = static_cast<std::size_t>(nd.cell.row * cols + nd.cell.col);
        if (g.domains_[idx] & bit(nd.color)) {
            throw Error(ErrorCode::InvalidArgument, "duplicate node");
        }
        g.domains_[idx] |= bit(nd.color);
        g.free_[idx] = 1;
    }
    // Canonical node order; edges are re-indexed through the permutation.
    std::vector<std::size_t> order(nodes.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return nodes[a] < nodes[b]; });
    std::vector<std::size_t> position(nodes.size());
    for (std::size_t i = 0; i < order.size(); ++i) position[order[i]] = i;
    g.nodes_.reserve(nodes.size());
    for (std::size_t i : order) g.nodes_.push_back(nodes[i]);

    const std::size_t n = g.nodes_.size();
    g.weights_.assign(n * n, 0.0f);
    for (const auto& e : edges) {
        if (e.u >= n || e.v >= n || e.u == e.v) {
            throw Error(ErrorCode::InvalidArgument, "edge endpoints invalid");
        }
        if (nodes[e.u].cell == nodes[e.v].cell) {
            throw Error(ErrorCode::InvalidArgument, "edge joins two colours of one cell");
        }
        if (!(e.weight > 0.0 && e.weight <= 1.0)) {
            throw Error(ErrorCode::InvalidArgument, "edge weight outside (0, 1]");
        }
        g.set_weight(position[e.u], position[e.v], static_cast<float>(e.weight));
    }
    return g;
}

std::size_t CompatGraph::edge_count() const {
    std::size_t count = 0;
    const std::size_t n = nodes_.size();
    for (std::size_t u = 0; u < n; ++u) {
        for (std::size_t v = u + 1; v < n; ++v) {
            if (weights_[u * n + v] != 0.0f) ++count;
        }
    }
    return count;
}

double CompatGraph::weighted_degree(std::size_t u) const {
    const std::size_t n = nodes_.size();
    double deg = 0.0;
    for (std::size_t v = 0; v < n; ++v) deg += weights_[u * n + v];
    return deg;
}

std::optional<std::size_t> CompatGraph::find_node(Cell cell, Color color) const {
    const GraphNode key{cell, color};
    auto it = std::lower_bound(nodes_.begin(), nodes_.end(), key);
    if (it == nodes_.end() || *it != key) return std::nullopt;
    return static_cast<std::size_t>(it - nodes_.begin());
}

bool CompatGraph::is_free(Cell cell) const {
    if (cell.row < 0 || cell.row >= rows_ || cell.col < 0 || cell.col >= cols_) return false;
    return free_[static_cast<std::size_t>(cell.row * cols_ + cell.col)] != 0;
}

ColorMask CompatGraph::domain(Cell cell) const {
    if (!is_free(cell)) return 0;
    return domains_[static_cast<std::size_t>(cell.row * cols_ + cell.col)];
}

std::string CompatGraph::dump_csv() const {
    std::string out;
    const std::size_t n = nodes_.size();
    for (std::size_t u = 0; u < n; ++u) {
        for (std::size_t v = u + 1; v < n; ++v) {
            const float w = weights_[u * n + v];
            if (w == 0.0f) continue;
            const auto& a = nodes_[u];
            const auto& b = nodes_[v];
            out += fmt::format("{},{},{},{},{},{},{}\n", a.cell.row, a.cell.col, a.color,
                               b.cell.row, b.cell.col, b.color, w);
        }
    }
    return out;
}

bool operator==(const CompatGraph& a, const CompatGraph& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.alphabet_size_ == b.alphabet_size_ &&
           a.rule_ == b.rule_ && a.nodes_ == b.nodes_ && a.weights_ == b.weights_ &&
           a.domains_ == b.domains_ && a.free_ == b.free_;
}

CompatGraph build_compat_graph(const GridTask& task, const PatternRule& rule) {
    if (task.missing_count() == 0) {
        throw Error(ErrorCode::NoMissingCells, "compatibility graph needs an unfilled cell");
    }
    RuleModel model(task, rule);
    auto dom = initial_domains(task);
    model.propagate(dom);

    CompatGraph g;
    g.rows_ = task.rows();
    g.cols_ = task.cols();
    g.alphabet_size_ = task.alphabet_size();
    g.rule_ = rule;
    g.free_.assign(static_cast<std::size_t>(task.size()), 0);
    std::vector<int> cell_of;
    for (int i = 0; i < task.size(); ++i) {
        if (task.at(i)) continue;
        g.free_[i] = 1;
        for (ColorMask m = dom[i]; m != 0; m &= m - 1) {
            g.nodes_.push_back({task.cell_at(i), std::countr_zero(m)});
            cell_of.push_back(i);
        }
    }
    g.domains_ = std::move(dom);

    const std::size_t n = g.nodes_.size();
    g.weights_.assign(n * n, 0.0f);
    for (std::size_t u = 0; u < n; ++u) {
        for (std::size_t v = u + 1; v < n; ++v) {
            if (cell_of[u] == cell_of[v]) continue;
            const float w = model.weight(cell_of[u], g.nodes_[u].color, cell_of[v], g.nodes_[v].color);
            if (w != 0.0f) g.set_weight(u, v, w);
        }
    }
    return g;
}

CompatGraph incremental_update(const CompatGraph& parent_graph, const GridTask& parent_task,
                               Assignment a) {
    if (parent_task.rows() != parent_graph.rows() || parent_task.cols() != parent_graph.cols() ||
        parent_task.alphabet_size() != parent_graph.alphabet_size()) {
        throw Error(ErrorCode::InvalidAssignment, "parent task does not match parent graph");
    }
    if (!parent_task.in_bounds(a.cell) || !parent_task.is_missing(a.cell) ||
        !parent_graph.find_node(a.cell, a.color)) {
        throw Error(ErrorCode::InvalidAssignment, "assignment is not a node of the parent graph");
    }
    const GridTask child_task = apply_assignment(parent_task, a);
    RuleModel model(child_task, parent_graph.rule_);
    const int assigned = parent_task.index(a.cell);

    std::vector<ColorMask> dom = parent_graph.domains_;
    dom[assigned] = 0;
    model.propagate(dom);

    CompatGraph g;
    g.rows_ = parent_graph.rows_;
    g.cols_ = parent_graph.cols_;
    g.alphabet_size_ = parent_graph.alphabet_size_;
    g.rule_ = parent_graph.rule_;
    g.free_ = parent_graph.free_;
    g.free_[assigned] = 0;

    // Surviving nodes keep their relative order.
    std::vector<std::size_t> kept;
    std::vector<int> cell_of;
    kept.reserve(parent_graph.nodes_.size());
    for (std::size_t u = 0; u < parent_graph.nodes_.size(); ++u) {
        const auto& nd = parent_graph.nodes_[u];
        const int idx = parent_task.index(nd.cell);
        if (idx == assigned || (dom[idx] & bit(nd.color)) == 0) continue;
        kept.push_back(u);
        cell_of.push_back(idx);
        g.nodes_.push_back(nd);
    }
    g.domains_ = std::move(dom);

    const std::size_t n = kept.size();
    const std::size_t pn = parent_graph.nodes_.size();
    g.weights_.assign(n * n, 0.0f);
    for (std::size_t u = 0; u < n; ++u) {
        for (std::size_t v = 0; v < n; ++v) {
            g.weights_[u * n + v] = parent_graph.weights_[kept[u] * pn + kept[v]];
        }
    }

    // Local refresh of the entries whose weight can depend on the assignment.
    auto refresh = [&](std::size_t u, std::size_t v) {
        if (cell_of[u] == cell_of[v]) return;
        g.set_weight(u, v, model.weight(cell_of[u], g.nodes_[u].color, cell_of[v],
                                        g.nodes_[v].color));
    };
    switch (family_of(g.rule_)) {
        case PatternFamily::ColorFrequency:
            for (std::size_t u = 0; u < n; ++u) {
                for (std::size_t v = u + 1; v < n; ++v) refresh(u, v);
            }
            break;
        case PatternFamily::ArithmeticProgression:
            for (std::size_t u = 0; u < n; ++u) {
                for (std::size_t v = u + 1; v < n; ++v) {
                    if (model.shared_line(cell_of[u], cell_of[v]) >= 0) refresh(u, v);
                }
            }
            break;
        default: break;  // orbit and spatial weights do not depend on filled cells
    }
    return g;
}

std::vector<Color> valid_colors(const CompatGraph& graph, Cell cell) {
    if (!graph.is_free(cell)) {
        throw Error(ErrorCode::CellNotInGraph, "cell is not an unfilled cell of the graph");
    }
    std::vector<Color> out;
    for (ColorMask m = graph.domain(cell); m != 0; m &= m - 1) out.push_back(std::countr_zero(m));
    return out;
}

}  // namespace topomcts
