#include "topomcts/pattern.hpp"

#include <cmath>
#include <map>
#include <set>

#include "topomcts/error.hpp"

namespace topomcts {

namespace {

const char* axis_name(Axis a) {
    switch (a) {
        case Axis::Horizontal: return "h";
        case Axis::Vertical: return "v";
        case Axis::Diagonal: return "diag";
        case Axis::AntiDiagonal: return "antidiag";
    }
    return "?";
}

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

PatternFamily family_of(const PatternRule& rule) noexcept {
    return std::visit(overloaded{
                          [](const RotationalSymmetry&) { return PatternFamily::Rotational; },
                          [](const ReflectiveSymmetry&) { return PatternFamily::Reflective; },
                          [](const ColorFrequency&) { return PatternFamily::ColorFrequency; },
                          [](const ArithmeticProgression&) {
                              return PatternFamily::ArithmeticProgression;
                          },
                          [](const SpatialPattern&) { return PatternFamily::Spatial; },
                      },
                      rule);
}

std::string to_string(const PatternRule& rule) {
    return std::visit(
        overloaded{
            [](const RotationalSymmetry& r) {
                return "rotational_symmetry_" + std::to_string(r.angle);
            },
            [](const ReflectiveSymmetry& r) {
                return std::string("reflective_symmetry_") + axis_name(r.axis);
            },
            [](const ColorFrequency&) { return std::string("color_frequency"); },
            [](const ArithmeticProgression&) { return std::string("arithmetic_progression"); },
            [](const SpatialPattern&) { return std::string("spatial_pattern"); },
        },
        rule);
}

PatternRule parse_rule(std::string_view name) {
    static const std::map<std::string, PatternRule, std::less<>> table = {
        {"rotational_symmetry_90", RotationalSymmetry{90}},
        {"rotational_symmetry_180", RotationalSymmetry{180}},
        {"rotational_symmetry_270", RotationalSymmetry{270}},
        {"reflective_symmetry_h", ReflectiveSymmetry{Axis::Horizontal}},
        {"reflective_symmetry_v", ReflectiveSymmetry{Axis::Vertical}},
        {"reflective_symmetry_diag", ReflectiveSymmetry{Axis::Diagonal}},
        {"reflective_symmetry_antidiag", ReflectiveSymmetry{Axis::AntiDiagonal}},
        {"color_frequency", ColorFrequency{}},
        {"arithmetic_progression", ArithmeticProgression{}},
        {"spatial_pattern", SpatialPattern{}},
    };
    if (auto it = table.find(name); it != table.end()) return it->second;
    throw Error(ErrorCode::InvalidArgument, "unknown pattern rule '" + std::string(name) + "'");
}

std::string to_string(PatternFamily family) {
    switch (family) {
        case PatternFamily::Rotational: return "rotational_symmetry";
        case PatternFamily::Reflective: return "reflective_symmetry";
        case PatternFamily::ColorFrequency: return "color_frequency";
        case PatternFamily::ArithmeticProgression: return "arithmetic_progression";
        case PatternFamily::Spatial: return "spatial_pattern";
    }
    return "?";
}

PatternFamily parse_family(std::string_view name) {
    for (auto f : kAllFamilies) {
        if (name == to_string(f)) return f;
    }
    // Accept full rule names too.
    return family_of(parse_rule(name));
}

bool requires_square(Transform t) noexcept {
    switch (t) {
        case Transform::ReflectH:
        case Transform::ReflectV: return false;
        default: return true;
    }
}

Cell apply_transform(Transform t, Cell c, int rows, int cols) noexcept {
    const int r = c.row;
    const int k = c.col;
    switch (t) {
        case Transform::Rot90: return {k, rows - 1 - r};
        case Transform::Rot180: return {rows - 1 - r, cols - 1 - k};
        case Transform::Rot270: return {cols - 1 - k, r};
        case Transform::ReflectH: return {rows - 1 - r, k};
        case Transform::ReflectV: return {r, cols - 1 - k};
        case Transform::ReflectDiag: return {k, r};
        case Transform::ReflectAntiDiag: return {cols - 1 - k, rows - 1 - r};
    }
    return c;
}

Transform transform_of(const PatternRule& rule) {
    if (const auto* rot = std::get_if<RotationalSymmetry>(&rule)) {
        switch (rot->angle) {
            case 90: return Transform::Rot90;
            case 180: return Transform::Rot180;
            case 270: return Transform::Rot270;
            default: throw Error(ErrorCode::InvalidArgument, "rotation angle must be 90/180/270");
        }
    }
    if (const auto* ref = std::get_if<ReflectiveSymmetry>(&rule)) {
        switch (ref->axis) {
            case Axis::Horizontal: return Transform::ReflectH;
            case Axis::Vertical: return Transform::ReflectV;
            case Axis::Diagonal: return Transform::ReflectDiag;
            case Axis::AntiDiagonal: return Transform::ReflectAntiDiag;
        }
    }
    throw Error(ErrorCode::InvalidArgument, "rule " + to_string(rule) + " has no transform");
}

PatternRule rule_of(Transform t) noexcept {
    switch (t) {
        case Transform::Rot90: return RotationalSymmetry{90};
        case Transform::Rot180: return RotationalSymmetry{180};
        case Transform::Rot270: return RotationalSymmetry{270};
        case Transform::ReflectH: return ReflectiveSymmetry{Axis::Horizontal};
        case Transform::ReflectV: return ReflectiveSymmetry{Axis::Vertical};
        case Transform::ReflectDiag: return ReflectiveSymmetry{Axis::Diagonal};
        case Transform::ReflectAntiDiag: return ReflectiveSymmetry{Axis::AntiDiagonal};
    }
    return SpatialPattern{};
}

void DetectionConfig::validate() const {
    if (!(symmetry_threshold > 0.0 && symmetry_threshold <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "symmetry threshold must be in (0, 1]");
    }
    if (!(frequency_cv_threshold > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "CV threshold must be positive");
    }
    if (min_ap_cells < 3) {
        throw Error(ErrorCode::InvalidArgument, "min_ap_cells must be at least 3");
    }
}

double symmetry_ratio(const GridTask& task, Transform t) {
    if (requires_square(t) && task.rows() != task.cols()) {
        throw Error(ErrorCode::ShapeMismatch, "transform requires a square grid");
    }
    std::set<std::pair<int, int>> pairs;
    for (int i = 0; i < task.size(); ++i) {
        const int j = task.index(apply_transform(t, task.cell_at(i), task.rows(), task.cols()));
        if (i != j) pairs.emplace(std::min(i, j), std::max(i, j));
    }
    int both = 0;
    int agree = 0;
    for (const auto& [i, j] : pairs) {
        const auto a = task.at(i);
        const auto b = task.at(j);
        if (a && b) {
            ++both;
            if (*a == *b) ++agree;
        }
    }
    return both == 0 ? 0.0 : static_cast<double>(agree) / static_cast<double>(both);
}

double color_frequency_cv(const GridTask& task) {
    std::vector<int> counts(static_cast<std::size_t>(task.alphabet_size()), 0);
    int filled = 0;
    for (int i = 0; i < task.size(); ++i) {
        if (auto v = task.at(i)) {
            ++counts[static_cast<std::size_t>(*v)];
            ++filled;
        }
    }
    if (filled == 0) throw Error(ErrorCode::EmptyGrid, "grid has no filled cells");
    double sum = 0.0;
    int present = 0;
    for (int c : counts) {
        if (c > 0) {
            sum += c;
            ++present;
        }
    }
    const double mean = sum / present;
    double var = 0.0;
    for (int c : counts) {
        if (c > 0) var += (c - mean) * (c - mean);
    }
    var /= present;
    return std::sqrt(var) / mean;
}

bool line_has_progression(const GridTask& task, bool row_line, int line, int min_cells) {
    const int len = row_line ? task.cols() : task.rows();
    auto value = [&](int t) {
        return row_line ? task.at(Cell{line, t}) : task.at(Cell{t, line});
    };
    // Length of the current run of filled cells sharing one difference.
    int run = 0;
    int diff = 0;
    std::optional<Color> prev;
    for (int t = 0; t < len; ++t) {
        const auto v = value(t);
        if (!v) {
            run = 0;
            prev.reset();
            continue;
        }
        if (!prev) {
            run = 1;
        } else if (run == 1 || *v - *prev != diff) {
            diff = *v - *prev;
            run = 2;
        } else {
            ++run;
        }
        prev = v;
        if (run >= min_cells) return true;
    }
    return false;
}

bool has_arithmetic_progression(const GridTask& task, const DetectionConfig& cfg) {
    for (int r = 0; r < task.rows(); ++r) {
        if (line_has_progression(task, true, r, cfg.min_ap_cells)) return true;
    }
    for (int c = 0; c < task.cols(); ++c) {
        if (line_has_progression(task, false, c, cfg.min_ap_cells)) return true;
    }
    return false;
}

PatternRule detect_pattern(const GridTask& task, const DetectionConfig& cfg) {
    cfg.validate();
    if (task.missing_count() == task.size()) {
        throw Error(ErrorCode::EmptyGrid, "cannot detect a pattern on an empty grid");
    }
    const bool square = task.rows() == task.cols();
    for (Transform t : kDetectionOrder) {
        if (requires_square(t) && !square) continue;
        if (symmetry_ratio(task, t) >= cfg.symmetry_threshold) return rule_of(t);
    }
    if (color_frequency_cv(task) < cfg.frequency_cv_threshold) return ColorFrequency{};
    if (has_arithmetic_progression(task, cfg)) return ArithmeticProgression{};
    return SpatialPattern{};
}

}  // namespace topomcts
