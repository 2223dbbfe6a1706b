#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "topomcts/grid.hpp"
#include "topomcts/pattern.hpp"

namespace topomcts {

/// Bit k set means colour k is allowed.
using ColorMask = std::uint64_t;

inline ColorMask full_mask(int alphabet_size) {
    return alphabet_size >= 64 ? ~ColorMask{0} : ((ColorMask{1} << alphabet_size) - 1);
}

struct GraphNode {
    Cell cell;
    Color color = 0;

    friend auto operator<=>(const GraphNode&, const GraphNode&) = default;
};

/// Weighted compatibility graph over (cell, colour) candidates of the
/// unfilled cells of one search state. An edge marks two assignments that can
/// coexist under the rule; weight 1 is hard-allowed, 0.5 weakly penalised.
/// Nodes are ordered by (row, col, colour).
class CompatGraph {
public:
    struct Edge {
        std::size_t u = 0;
        std::size_t v = 0;
        double weight = 1.0;
    };

    CompatGraph() = default;

    /// Generic graph for analysis and tests. Nodes must be distinct; edges join
    /// distinct nodes of different cells with weight in (0, 1].
    static CompatGraph from_edges(int rows, int cols, int alphabet_size, PatternRule rule,
                                  std::vector<GraphNode> nodes, const std::vector<Edge>& edges);

    int rows() const noexcept { return rows_; }
    int cols() const noexcept { return cols_; }
    int alphabet_size() const noexcept { return alphabet_size_; }
    const PatternRule& rule() const noexcept { return rule_; }

    std::size_t node_count() const noexcept { return nodes_.size(); }
    std::size_t edge_count() const;
    bool empty() const noexcept { return nodes_.empty(); }
    const std::vector<GraphNode>& nodes() const noexcept { return nodes_; }
    const GraphNode& node(std::size_t u) const { return nodes_.at(u); }

    /// 0 when there is no edge.
    double weight(std::size_t u, std::size_t v) const {
        return static_cast<double>(weights_[u * nodes_.size() + v]);
    }
    double weighted_degree(std::size_t u) const;
    std::optional<std::size_t> find_node(Cell cell, Color color) const;

    /// True when `cell` is an unfilled cell of the associated state.
    bool is_free(Cell cell) const;
    /// Colours still valid at a free cell (0 for dead ends and filled cells).
    ColorMask domain(Cell cell) const;
    const std::vector<ColorMask>& domains() const noexcept { return domains_; }

    /// Edge list, one "r1,c1,k1,r2,c2,k2,w" line per edge with u < v.
    std::string dump_csv() const;

    friend bool operator==(const CompatGraph& a, const CompatGraph& b);

private:
    friend CompatGraph build_compat_graph(const GridTask&, const PatternRule&);
    friend CompatGraph incremental_update(const CompatGraph&, const GridTask&, Assignment);

    void set_weight(std::size_t u, std::size_t v, float w) {
        weights_[u * nodes_.size() + v] = w;
        weights_[v * nodes_.size() + u] = w;
    }

    int rows_ = 0;
    int cols_ = 0;
    int alphabet_size_ = 0;
    PatternRule rule_ = SpatialPattern{};
    std::vector<GraphNode> nodes_;
    std::vector<float> weights_;        // dense symmetric, row-major
    std::vector<ColorMask> domains_;    // per cell, row-major
    std::vector<char> free_;            // per cell
};

/// From-scratch construction for a state with at least one unfilled cell.
/// Throws NoMissingCells.
CompatGraph build_compat_graph(const GridTask& task, const PatternRule& rule);

/// Child graph after applying `a` to `parent_task`, derived from the parent by
/// pruning and local weight refresh. Equal to build_compat_graph on the child.
/// Throws InvalidAssignment unless `a` names a node of `parent_graph`.
CompatGraph incremental_update(const CompatGraph& parent_graph, const GridTask& parent_task,
                               Assignment a);

/// Colours of the nodes at `cell`, ascending. Throws CellNotInGraph for
/// filled or out-of-range cells.
std::vector<Color> valid_colors(const CompatGraph& graph, Cell cell);

/// Unfilled cells start with every colour, filled cells with none.
std::vector<ColorMask> initial_domains(const GridTask& task);

/// Narrows the domains of unfilled cells to the rule's fixpoint. `domains`
/// must hold 0 for filled cells and a superset of the fixpoint elsewhere.
void propagate_domains(const GridTask& task, const PatternRule& rule,
                       std::vector<ColorMask>& domains);

}  // namespace topomcts
