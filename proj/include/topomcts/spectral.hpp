#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "topomcts/compat_graph.hpp"
#include "topomcts/grid.hpp"

namespace topomcts {

struct FeatureWeights {
    double w_lambda = 1.0;
    double w_r = 1.0;
    double w_sigma = 0.5;
};

struct EigenOptions {
    double tol = 1e-8;
    int max_iterations = 500;
    /// Graphs up to this many nodes use the dense symmetric solver.
    int dense_limit = 64;
    bool force_iterative = false;
};

struct Lambda2Result {
    double value = 0.0;
    /// Unit Fiedler estimate in graph node order; filled by the Krylov path only.
    Eigen::VectorXd fiedler;
    int iterations = 0;
    bool iterative = false;
};

/// L = D - A with weighted degrees, in graph node order.
Eigen::MatrixXd weighted_laplacian(const CompatGraph& graph);

/// Second-smallest eigenvalue of a symmetric Laplacian by full dense solve.
/// Matrices smaller than 2x2 yield 0.
double lambda2_dense(const Eigen::MatrixXd& laplacian);

/// Lanczos with full reorthogonalisation on the complement of the constant
/// vector. Throws NoConvergenceError when the iteration cap is hit.
Lambda2Result lambda2_lanczos(const Eigen::MatrixXd& laplacian, double tol, int max_iterations,
                              const Eigen::VectorXd* warm_start = nullptr);

/// Algebraic connectivity of the weighted compatibility graph; exactly 0 for
/// graphs with fewer than two nodes or more than one component.
Lambda2Result lambda2(const CompatGraph& graph, const EigenOptions& opts = {},
                      const Eigen::VectorXd* warm_start = nullptr);

/// Maps a vector over `from`'s nodes onto `to`'s nodes (nodes missing in
/// `from` get 0). Used to warm-start a child solve from its parent.
Eigen::VectorXd restrict_to(const CompatGraph& from, const Eigen::VectorXd& values,
                            const CompatGraph& to);

/// 1 - H(p)/log K for a distribution proportional to `masses`.
double rigidity_from_masses(std::span<const double> masses, int alphabet_size);

/// Rigidity of an unfilled cell, with p_k proportional to 1 + weighted degree
/// of node (cell, k). Throws NoValidColors for dead-end cells, CellNotInGraph
/// for filled cells.
double rigidity(const CompatGraph& graph, const GridTask& task, Cell cell);

struct CellRigidity {
    Cell cell;
    double value = 0.0;
};

struct SpectralFeatures {
    double lambda2 = 0.0;
    std::vector<CellRigidity> rigidity;
    double max_rigidity = 0.0;
    double color_count_stdev = 0.0;
    double composite_f = 0.0;
    Eigen::VectorXd fiedler;
};

/// Composite feature over all unfilled cells. Terminal states give all zeros.
/// `graph` is ignored when the task has no unfilled cells.
SpectralFeatures composite_feature(const CompatGraph& graph, const GridTask& task,
                                   const FeatureWeights& weights, const EigenOptions& opts = {},
                                   const Eigen::VectorXd* warm_start = nullptr);

/// (v - mean) / (stdev + epsilon) with population statistics. Identical
/// inputs map to exact zeros. Throws EmptyList.
std::vector<double> sibling_normalize(std::span<const double> values, double epsilon = 1e-6);

}  // namespace topomcts
