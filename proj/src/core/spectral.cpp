#include "topomcts/spectral.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "topomcts/error.hpp"

namespace topomcts {

Eigen::MatrixXd weighted_laplacian(const CompatGraph& graph) {
    const auto n = static_cast<Eigen::Index>(graph.node_count());
    Eigen::MatrixXd lap(n, n);
    for (Eigen::Index u = 0; u < n; ++u) {
        double deg = 0.0;
        for (Eigen::Index v = 0; v < n; ++v) {
            const double w = graph.weight(static_cast<std::size_t>(u), static_cast<std::size_t>(v));
            lap(u, v) = -w;
            deg += w;
        }
        lap(u, u) = deg;
    }
    return lap;
}

double lambda2_dense(const Eigen::MatrixXd& laplacian) {
    if (laplacian.rows() < 2) return 0.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(laplacian, Eigen::EigenvaluesOnly);
    return std::max(0.0, solver.eigenvalues()(1));
}

namespace {

// Deterministic start/restart vectors so repeated solves are reproducible.
Eigen::VectorXd random_vector(Eigen::Index n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = dist(rng);
    return v;
}

void project_out(Eigen::VectorXd& w, const Eigen::MatrixXd& basis, Eigen::Index cols) {
    const double mean = w.mean();
    w.array() -= mean;
    if (cols > 0) {
        const auto q = basis.leftCols(cols);
        w -= q * (q.transpose() * w);
    }
}

bool is_connected(const CompatGraph& graph) {
    const std::size_t n = graph.node_count();
    if (n == 0) return false;
    std::vector<char> seen(n, 0);
    std::vector<std::size_t> stack{0};
    seen[0] = 1;
    std::size_t reached = 1;
    while (!stack.empty()) {
        const std::size_t u = stack.back();
        stack.pop_back();
        for (std::size_t v = 0; v < n; ++v) {
            if (!seen[v] && graph.weight(u, v) != 0.0) {
                seen[v] = 1;
                ++reached;
                stack.push_back(v);
            }
        }
    }
    return reached == n;
}

}  // namespace

Lambda2Result lambda2_lanczos(const Eigen::MatrixXd& laplacian, double tol, int max_iterations,
                              const Eigen::VectorXd* warm_start) {
    if (!(tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "tolerance must be positive");
    if (max_iterations < 1) throw Error(ErrorCode::InvalidArgument, "iteration cap must be >= 1");
    const Eigen::Index n = laplacian.rows();
    Lambda2Result result;
    result.iterative = true;
    if (n < 2) {
        result.fiedler = Eigen::VectorXd::Zero(n);
        return result;
    }
    // Dimension of the complement of the constant vector.
    const Eigen::Index full = n - 1;
    const Eigen::Index cap = std::min<Eigen::Index>(full, max_iterations);
    const double scale = std::max(1.0, laplacian.diagonal().cwiseAbs().maxCoeff());

    std::mt19937_64 rng(0x9e3779b97f4a7c15ULL);
    Eigen::MatrixXd basis(n, cap);
    std::vector<double> alpha;
    std::vector<double> beta;

    Eigen::VectorXd start = random_vector(n, rng);
    if (warm_start && warm_start->size() == n) {
        // Keep a random component so no eigendirection is missing from the start.
        Eigen::VectorXd warm = *warm_start;
        warm.array() -= warm.mean();
        const double norm = warm.norm();
        if (norm > 0.0) start = warm / norm + 0.1 * start / start.norm();
    }
    project_out(start, basis, 0);
    basis.col(0) = start / start.norm();

    double theta = 0.0;
    Eigen::VectorXd ritz;
    for (Eigen::Index j = 0;; ++j) {
        Eigen::VectorXd w = laplacian * basis.col(j);
        const double a = basis.col(j).dot(w);
        alpha.push_back(a);
        w -= a * basis.col(j);
        if (j > 0) w -= beta.back() * basis.col(j - 1);
        project_out(w, basis, j + 1);
        project_out(w, basis, j + 1);
        const double b = w.norm();

        const auto m = static_cast<Eigen::Index>(alpha.size());
        Eigen::VectorXd diag = Eigen::Map<const Eigen::VectorXd>(alpha.data(), m);
        Eigen::VectorXd sub(std::max<Eigen::Index>(m - 1, 0));
        for (Eigen::Index i = 0; i + 1 < m; ++i) sub(i) = beta[static_cast<std::size_t>(i)];
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
        tri.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
        theta = tri.eigenvalues()(0);
        ritz = tri.eigenvectors().col(0);
        const double residual = b * std::abs(ritz(m - 1));
        result.iterations = static_cast<int>(m);

        const bool exhausted = m == full;
        const bool breakdown = b <= 1e-12 * scale;
        if (exhausted || (!breakdown && residual < tol)) break;
        if (m == cap) throw NoConvergenceError(std::max(0.0, theta), static_cast<int>(m));

        if (breakdown) {
            // Invariant subspace: continue from a fresh orthogonal direction.
            Eigen::VectorXd r = random_vector(n, rng);
            project_out(r, basis, m);
            project_out(r, basis, m);
            beta.push_back(0.0);
            basis.col(m) = r / r.norm();
        } else {
            beta.push_back(b);
            basis.col(m) = w / b;
        }
    }
    result.value = std::max(0.0, theta);
    const auto m = static_cast<Eigen::Index>(alpha.size());
    result.fiedler = basis.leftCols(m) * ritz;
    const double norm = result.fiedler.norm();
    if (norm > 0.0) result.fiedler /= norm;
    return result;
}

Lambda2Result lambda2(const CompatGraph& graph, const EigenOptions& opts,
                      const Eigen::VectorXd* warm_start) {
    if (!(opts.tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "tolerance must be positive");
    Lambda2Result result;
    const auto n = static_cast<int>(graph.node_count());
    if (n < 2 || !is_connected(graph)) {
        result.fiedler = Eigen::VectorXd::Zero(n);
        return result;
    }
    const Eigen::MatrixXd lap = weighted_laplacian(graph);
    if (n <= opts.dense_limit && !opts.force_iterative) {
        result.value = lambda2_dense(lap);
        return result;
    }
    return lambda2_lanczos(lap, opts.tol, opts.max_iterations, warm_start);
}

Eigen::VectorXd restrict_to(const CompatGraph& from, const Eigen::VectorXd& values,
                            const CompatGraph& to) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(to.node_count()));
    if (values.size() != static_cast<Eigen::Index>(from.node_count())) return out;
    for (std::size_t u = 0; u < to.node_count(); ++u) {
        const auto& nd = to.node(u);
        if (auto src = from.find_node(nd.cell, nd.color)) {
            out(static_cast<Eigen::Index>(u)) = values(static_cast<Eigen::Index>(*src));
        }
    }
    return out;
}

double rigidity_from_masses(std::span<const double> masses, int alphabet_size) {
    if (masses.empty()) throw Error(ErrorCode::NoValidColors, "cell has no valid colours");
    if (alphabet_size < 2) return 1.0;
    double total = 0.0;
    for (double m : masses) total += m;
    double entropy = 0.0;
    for (double m : masses) {
        if (m <= 0.0) continue;
        const double p = m / total;
        entropy -= p * std::log(p);
    }
    return std::clamp(1.0 - entropy / std::log(static_cast<double>(alphabet_size)), 0.0, 1.0);
}

double rigidity(const CompatGraph& graph, const GridTask& task, Cell cell) {
    if (task.alphabet_size() != graph.alphabet_size()) {
        throw Error(ErrorCode::InvalidArgument, "task and graph alphabets differ");
    }
    if (!graph.is_free(cell)) {
        throw Error(ErrorCode::CellNotInGraph, "cell is not an unfilled cell of the graph");
    }
    std::vector<double> masses;
    for (ColorMask m = graph.domain(cell); m != 0; m &= m - 1) {
        const auto u = graph.find_node(cell, std::countr_zero(m));
        masses.push_back(1.0 + graph.weighted_degree(*u));
    }
    return rigidity_from_masses(masses, task.alphabet_size());
}

SpectralFeatures composite_feature(const CompatGraph& graph, const GridTask& task,
                                   const FeatureWeights& weights, const EigenOptions& opts,
                                   const Eigen::VectorXd* warm_start) {
    SpectralFeatures out;
    if (task.missing_count() == 0) return out;

    auto l2 = lambda2(graph, opts, warm_start);
    out.lambda2 = l2.value;
    out.fiedler = std::move(l2.fiedler);

    // Masses for every node in one pass; nodes are grouped by cell.
    std::vector<double> masses(graph.node_count());
    for (std::size_t u = 0; u < graph.node_count(); ++u) {
        masses[u] = 1.0 + graph.weighted_degree(u);
    }
    std::vector<double> valid_counts;
    std::size_t u = 0;
    for (const Cell& cell : task.missing_cells()) {
        const std::size_t begin = u;
        while (u < graph.node_count() && graph.node(u).cell == cell) ++u;
        valid_counts.push_back(static_cast<double>(u - begin));
        if (u == begin) continue;  // dead end: no rigidity defined
        const double r = rigidity_from_masses(
            std::span<const double>(masses.data() + begin, u - begin), task.alphabet_size());
        out.rigidity.push_back({cell, r});
        out.max_rigidity = std::max(out.max_rigidity, r);
    }

    double mean = 0.0;
    for (double c : valid_counts) mean += c;
    mean /= static_cast<double>(valid_counts.size());
    double var = 0.0;
    for (double c : valid_counts) var += (c - mean) * (c - mean);
    out.color_count_stdev = std::sqrt(var / static_cast<double>(valid_counts.size()));

    out.composite_f = weights.w_lambda * out.lambda2 + weights.w_r * out.max_rigidity +
                      weights.w_sigma * out.color_count_stdev;
    return out;
}

std::vector<double> sibling_normalize(std::span<const double> values, double epsilon) {
    if (values.empty()) throw Error(ErrorCode::EmptyList, "cannot normalise an empty list");
    if (!(epsilon > 0.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must be positive");
    std::vector<double> out(values.size(), 0.0);
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    if (*lo == *hi) return out;
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / static_cast<double>(values.size()));
    for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - mean) / (sd + epsilon);
    return out;
}

}  // namespace topomcts
