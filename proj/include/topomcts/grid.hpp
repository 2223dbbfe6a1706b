#pragma once

#include <compare>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace topomcts {

using Color = int;

/// Serialized marker for an unfilled cell. Never stored in a GridTask.
inline constexpr int kMissingCode = -1;

/// Upper bound on the alphabet size; colour sets are stored as 64-bit masks.
inline constexpr int kMaxAlphabet = 64;

struct Cell {
    int row = 0;
    int col = 0;

    friend auto operator<=>(const Cell&, const Cell&) = default;
};

struct Assignment {
    Cell cell;
    Color color = 0;

    friend bool operator==(const Assignment&, const Assignment&) = default;
};

/// An m x n coloured grid with unfilled cells, alphabet size K and an
/// optional complete ground-truth grid. Immutable; copies share the truth.
class GridTask {
public:
    GridTask(int rows, int cols, int alphabet_size, std::vector<std::optional<Color>> cells,
             std::optional<std::vector<Color>> ground_truth = std::nullopt);

    /// Builds a task from row-major integer rows where -1 marks a missing cell.
    static GridTask from_codes(int alphabet_size, const std::vector<std::vector<int>>& cells,
                               const std::optional<std::vector<std::vector<int>>>& truth =
                                   std::nullopt);

    int rows() const noexcept { return rows_; }
    int cols() const noexcept { return cols_; }
    int alphabet_size() const noexcept { return alphabet_size_; }
    int size() const noexcept { return rows_ * cols_; }

    bool in_bounds(Cell c) const noexcept {
        return c.row >= 0 && c.row < rows_ && c.col >= 0 && c.col < cols_;
    }
    int index(Cell c) const noexcept { return c.row * cols_ + c.col; }
    Cell cell_at(int index) const noexcept { return {index / cols_, index % cols_}; }

    std::optional<Color> at(Cell c) const { return cells_.at(index(c)); }
    std::optional<Color> at(int index) const { return cells_.at(index); }
    bool is_missing(Cell c) const { return !at(c).has_value(); }

    int missing_count() const noexcept { return missing_; }
    /// Missing cells in row-major order.
    std::vector<Cell> missing_cells() const;

    bool has_ground_truth() const noexcept { return truth_ != nullptr; }
    const std::vector<Color>& ground_truth() const;
    Color truth_at(int index) const { return ground_truth().at(index); }

    /// Row-major codes with kMissingCode for unfilled cells.
    std::vector<int> codes() const;

    friend bool operator==(const GridTask& a, const GridTask& b);

private:
    friend GridTask apply_assignment(const GridTask& task, Assignment a);
    GridTask() = default;

    int rows_ = 0;
    int cols_ = 0;
    int alphabet_size_ = 0;
    int missing_ = 0;
    std::vector<std::optional<Color>> cells_;
    std::shared_ptr<const std::vector<Color>> truth_;
};

/// Returns a copy of `task` with the assignment applied.
/// Throws CellAlreadyFilled, ColorOutOfRange or InvalidArgument (out of bounds).
GridTask apply_assignment(const GridTask& task, Assignment a);

/// Algebraic connectivity of the 4-neighbourhood grid graph of the given
/// shape. Depends only on the shape; a 1x1 grid yields 0.
double grid_laplacian_lambda2(int rows, int cols);
double grid_laplacian_lambda2(const GridTask& task);

// JSON: {"rows","cols","K","cells":[[int]],"ground_truth":[[int]]?}, -1 = missing.
nlohmann::json task_to_json(const GridTask& task);
GridTask task_from_json(const nlohmann::json& doc);
std::string task_to_json_string(const GridTask& task);
GridTask task_from_json_string(std::string_view text);

}  // namespace topomcts
