#pragma once

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "topomcts/grid.hpp"

namespace topomcts {

enum class Axis { Horizontal, Vertical, Diagonal, AntiDiagonal };

struct RotationalSymmetry {
    int angle = 180;  // 90, 180 or 270
    friend bool operator==(const RotationalSymmetry&, const RotationalSymmetry&) = default;
};
struct ReflectiveSymmetry {
    Axis axis = Axis::Horizontal;
    friend bool operator==(const ReflectiveSymmetry&, const ReflectiveSymmetry&) = default;
};
struct ColorFrequency {
    friend bool operator==(const ColorFrequency&, const ColorFrequency&) = default;
};
struct ArithmeticProgression {
    friend bool operator==(const ArithmeticProgression&, const ArithmeticProgression&) = default;
};
struct SpatialPattern {
    friend bool operator==(const SpatialPattern&, const SpatialPattern&) = default;
};

using PatternRule = std::variant<RotationalSymmetry, ReflectiveSymmetry, ColorFrequency,
                                 ArithmeticProgression, SpatialPattern>;

/// Coarse rule kind, ignoring angle/axis. Detection accuracy is scored on it.
enum class PatternFamily { Rotational, Reflective, ColorFrequency, ArithmeticProgression, Spatial };

inline constexpr PatternFamily kAllFamilies[] = {
    PatternFamily::Rotational, PatternFamily::Reflective, PatternFamily::ColorFrequency,
    PatternFamily::ArithmeticProgression, PatternFamily::Spatial};

PatternFamily family_of(const PatternRule& rule) noexcept;

// "rotational_symmetry_90", "reflective_symmetry_antidiag", "color_frequency", ...
std::string to_string(const PatternRule& rule);
PatternRule parse_rule(std::string_view name);
std::string to_string(PatternFamily family);
PatternFamily parse_family(std::string_view name);

/// Grid symmetry used by the detector and by orbit constraints.
enum class Transform { Rot90, Rot180, Rot270, ReflectH, ReflectV, ReflectDiag, ReflectAntiDiag };

inline constexpr Transform kDetectionOrder[] = {
    Transform::Rot90,    Transform::Rot180,      Transform::Rot270,         Transform::ReflectH,
    Transform::ReflectV, Transform::ReflectDiag, Transform::ReflectAntiDiag};

bool requires_square(Transform t) noexcept;
Cell apply_transform(Transform t, Cell c, int rows, int cols) noexcept;
/// Transform for a symmetry rule. Throws InvalidArgument for other kinds.
Transform transform_of(const PatternRule& rule);
PatternRule rule_of(Transform t) noexcept;

struct DetectionConfig {
    double symmetry_threshold = 0.8;
    double frequency_cv_threshold = 0.3;
    int min_ap_cells = 3;

    void validate() const;
};

/// Fraction of unordered filled pairs {c, T(c)}, c != T(c), whose colours agree.
/// 0 when no such pair has both cells filled. Throws ShapeMismatch for
/// rotations and diagonal reflections on non-square grids.
double symmetry_ratio(const GridTask& task, Transform t);

/// Population coefficient of variation of the counts of colours that appear.
/// Throws EmptyGrid when no cell is filled.
double color_frequency_cv(const GridTask& task);

/// True iff some row or column holds min_ap_cells contiguous filled cells with
/// a constant colour difference (0 included).
bool has_arithmetic_progression(const GridTask& task, const DetectionConfig& cfg = {});
bool line_has_progression(const GridTask& task, bool row_line, int line, int min_cells);

/// First accepted rule in priority order: rotations 90/180/270, reflections
/// h/v/diag/antidiag, colour frequency, arithmetic progression, then spatial.
PatternRule detect_pattern(const GridTask& task, const DetectionConfig& cfg = {});

}  // namespace topomcts
