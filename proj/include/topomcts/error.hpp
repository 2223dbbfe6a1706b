#pragma once

#include <stdexcept>
#include <string>

namespace topomcts {

enum class ErrorCode {
    InvalidArgument,
    CellAlreadyFilled,
    ColorOutOfRange,
    EmptyGrid,
    ShapeMismatch,
    NoMissingCells,
    InvalidAssignment,
    CellNotInGraph,
    NoValidColors,
    NoConvergence,
    NoChildren,
    EmptyList,
    InfeasibleSpec,
    MalformedDocument,
    ShapeChangeUnsupported,
    NoTasksFound,
    IOFailure,
    SchemaMismatch,
    InvariantViolation,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

// Iteration cap hit in an iterative eigensolve; carries the best Ritz value seen.
class NoConvergenceError : public Error {
public:
    NoConvergenceError(double best_estimate, int iterations)
        : Error(ErrorCode::NoConvergence,
                "eigensolver did not converge after " + std::to_string(iterations) +
                    " iterations"),
          best_estimate_(best_estimate) {}

    double best_estimate() const noexcept { return best_estimate_; }

private:
    double best_estimate_;
};

}  // namespace topomcts
