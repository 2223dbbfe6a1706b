#include "topomcts/grid.hpp"

#include <nlohmann/json.hpp>

#include "topomcts/error.hpp"
#include "topomcts/spectral.hpp"

namespace topomcts {

const char* to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::CellAlreadyFilled: return "CellAlreadyFilled";
        case ErrorCode::ColorOutOfRange: return "ColorOutOfRange";
        case ErrorCode::EmptyGrid: return "EmptyGrid";
        case ErrorCode::ShapeMismatch: return "ShapeMismatch";
        case ErrorCode::NoMissingCells: return "NoMissingCells";
        case ErrorCode::InvalidAssignment: return "InvalidAssignment";
        case ErrorCode::CellNotInGraph: return "CellNotInGraph";
        case ErrorCode::NoValidColors: return "NoValidColors";
        case ErrorCode::NoConvergence: return "NoConvergence";
        case ErrorCode::NoChildren: return "NoChildren";
        case ErrorCode::EmptyList: return "EmptyList";
        case ErrorCode::InfeasibleSpec: return "InfeasibleSpec";
        case ErrorCode::MalformedDocument: return "MalformedDocument";
        case ErrorCode::ShapeChangeUnsupported: return "ShapeChangeUnsupported";
        case ErrorCode::NoTasksFound: return "NoTasksFound";
        case ErrorCode::IOFailure: return "IOFailure";
        case ErrorCode::SchemaMismatch: return "SchemaMismatch";
        case ErrorCode::InvariantViolation: return "InvariantViolation";
    }
    return "Unknown";
}

GridTask::GridTask(int rows, int cols, int alphabet_size, std::vector<std::optional<Color>> cells,
                   std::optional<std::vector<Color>> ground_truth)
    : rows_(rows), cols_(cols), alphabet_size_(alphabet_size), cells_(std::move(cells)) {
    if (rows < 1 || cols < 1) {
        throw Error(ErrorCode::InvalidArgument, "grid shape must be positive");
    }
    if (alphabet_size < 1 || alphabet_size > kMaxAlphabet) {
        throw Error(ErrorCode::InvalidArgument,
                    "alphabet size must be in [1, " + std::to_string(kMaxAlphabet) + "]");
    }
    if (cells_.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols)) {
        throw Error(ErrorCode::ShapeMismatch, "cell count does not match rows*cols");
    }
    for (const auto& v : cells_) {
        if (!v) {
            ++missing_;
        } else if (*v < 0 || *v >= alphabet_size) {
            throw Error(ErrorCode::ColorOutOfRange, "cell colour outside [0, K)");
        }
    }
    if (ground_truth) {
        if (ground_truth->size() != cells_.size()) {
            throw Error(ErrorCode::ShapeMismatch, "ground truth shape differs from grid");
        }
        for (std::size_t i = 0; i < cells_.size(); ++i) {
            const Color t = (*ground_truth)[i];
            if (t < 0 || t >= alphabet_size) {
                throw Error(ErrorCode::ColorOutOfRange, "ground truth colour outside [0, K)");
            }
            if (cells_[i] && *cells_[i] != t) {
                throw Error(ErrorCode::InvalidArgument,
                            "ground truth disagrees with a filled cell");
            }
        }
        truth_ = std::make_shared<const std::vector<Color>>(std::move(*ground_truth));
    }
}

namespace {

std::pair<int, int> shape_of(const std::vector<std::vector<int>>& rows) {
    if (rows.empty() || rows.front().empty()) {
        throw Error(ErrorCode::ShapeMismatch, "grid must have at least one row and column");
    }
    const auto cols = rows.front().size();
    for (const auto& r : rows) {
        if (r.size() != cols) throw Error(ErrorCode::ShapeMismatch, "ragged grid rows");
    }
    return {static_cast<int>(rows.size()), static_cast<int>(cols)};
}

}  // namespace

GridTask GridTask::from_codes(int alphabet_size, const std::vector<std::vector<int>>& cells,
                              const std::optional<std::vector<std::vector<int>>>& truth) {
    const auto [rows, cols] = shape_of(cells);
    std::vector<std::optional<Color>> flat;
    flat.reserve(static_cast<std::size_t>(rows * cols));
    for (const auto& r : cells) {
        for (int v : r) {
            if (v == kMissingCode) {
                flat.emplace_back(std::nullopt);
            } else {
                flat.emplace_back(v);
            }
        }
    }
    std::optional<std::vector<Color>> flat_truth;
    if (truth) {
        const auto [tr, tc] = shape_of(*truth);
        if (tr != rows || tc != cols) {
            throw Error(ErrorCode::ShapeMismatch, "ground truth shape differs from grid");
        }
        flat_truth.emplace();
        for (const auto& r : *truth) flat_truth->insert(flat_truth->end(), r.begin(), r.end());
    }
    return GridTask(rows, cols, alphabet_size, std::move(flat), std::move(flat_truth));
}

std::vector<Cell> GridTask::missing_cells() const {
    std::vector<Cell> out;
    out.reserve(static_cast<std::size_t>(missing_));
    for (int i = 0; i < size(); ++i) {
        if (!cells_[static_cast<std::size_t>(i)]) out.push_back(cell_at(i));
    }
    return out;
}

const std::vector<Color>& GridTask::ground_truth() const {
    if (!truth_) throw Error(ErrorCode::InvalidArgument, "task has no ground truth");
    return *truth_;
}

std::vector<int> GridTask::codes() const {
    std::vector<int> out;
    out.reserve(cells_.size());
    for (const auto& v : cells_) out.push_back(v ? *v : kMissingCode);
    return out;
}

bool operator==(const GridTask& a, const GridTask& b) {
    if (a.rows_ != b.rows_ || a.cols_ != b.cols_ || a.alphabet_size_ != b.alphabet_size_ ||
        a.cells_ != b.cells_) {
        return false;
    }
    if (a.has_ground_truth() != b.has_ground_truth()) return false;
    return !a.has_ground_truth() || *a.truth_ == *b.truth_;
}

GridTask apply_assignment(const GridTask& task, Assignment a) {
    if (!task.in_bounds(a.cell)) {
        throw Error(ErrorCode::InvalidArgument, "assignment cell out of bounds");
    }
    if (a.color < 0 || a.color >= task.alphabet_size()) {
        throw Error(ErrorCode::ColorOutOfRange, "assignment colour outside [0, K)");
    }
    if (!task.is_missing(a.cell)) {
        throw Error(ErrorCode::CellAlreadyFilled, "cell is already filled");
    }
    GridTask out = task;
    out.cells_[static_cast<std::size_t>(task.index(a.cell))] = a.color;
    --out.missing_;
    return out;
}

double grid_laplacian_lambda2(int rows, int cols) {
    if (rows < 1 || cols < 1) throw Error(ErrorCode::InvalidArgument, "grid shape must be positive");
    const int n = rows * cols;
    Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n, n);
    auto link = [&](int u, int v) {
        lap(u, v) -= 1.0;
        lap(v, u) -= 1.0;
        lap(u, u) += 1.0;
        lap(v, v) += 1.0;
    };
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const int u = r * cols + c;
            if (c + 1 < cols) link(u, u + 1);
            if (r + 1 < rows) link(u, u + cols);
        }
    }
    return lambda2_dense(lap);
}

double grid_laplacian_lambda2(const GridTask& task) {
    return grid_laplacian_lambda2(task.rows(), task.cols());
}

namespace {

std::vector<std::vector<int>> to_rows(const std::vector<int>& flat, int rows, int cols) {
    std::vector<std::vector<int>> out(static_cast<std::size_t>(rows));
    for (int r = 0; r < rows; ++r) {
        out[static_cast<std::size_t>(r)].assign(flat.begin() + r * cols,
                                                flat.begin() + (r + 1) * cols);
    }
    return out;
}

}  // namespace

nlohmann::json task_to_json(const GridTask& task) {
    nlohmann::json doc;
    doc["rows"] = task.rows();
    doc["cols"] = task.cols();
    doc["K"] = task.alphabet_size();
    doc["cells"] = to_rows(task.codes(), task.rows(), task.cols());
    if (task.has_ground_truth()) {
        doc["ground_truth"] = to_rows(task.ground_truth(), task.rows(), task.cols());
    }
    return doc;
}

GridTask task_from_json(const nlohmann::json& doc) {
    try {
        const int rows = doc.at("rows").get<int>();
        const int cols = doc.at("cols").get<int>();
        const int k = doc.at("K").get<int>();
        auto cells = doc.at("cells").get<std::vector<std::vector<int>>>();
        std::optional<std::vector<std::vector<int>>> truth;
        if (doc.contains("ground_truth") && !doc["ground_truth"].is_null()) {
            truth = doc["ground_truth"].get<std::vector<std::vector<int>>>();
        }
        for (const auto& r : cells) {
            for (int v : r) {
                if (v < kMissingCode) {
                    throw Error(ErrorCode::ColorOutOfRange, "negative colour other than -1");
                }
            }
        }
        GridTask task = GridTask::from_codes(k, cells, truth);
        if (task.rows() != rows || task.cols() != cols) {
            throw Error(ErrorCode::ShapeMismatch, "declared shape differs from cell array");
        }
        return task;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::MalformedDocument, std::string("task JSON: ") + e.what());
    }
}

std::string task_to_json_string(const GridTask& task) { return task_to_json(task).dump(); }

GridTask task_from_json_string(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::MalformedDocument, std::string("task JSON: ") + e.what());
    }
    return task_from_json(doc);
}

}  // namespace topomcts
