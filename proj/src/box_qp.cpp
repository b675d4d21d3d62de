#include "sscl/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace sscl {

namespace {

constexpr double kTinyDiagonal = 1e-12;
constexpr int kPolishEvery = 5;

void validate(const BoxQpProblem& p, const SolveOptions& options) {
    if (p.M.rows() != p.M.cols()) throw std::invalid_argument("box QP: M must be square");
    if (!(p.upper > 0.0)) throw std::invalid_argument("box QP: upper bound must be positive");
    if (!(options.tol > 0.0)) throw std::invalid_argument("box QP: tolerance must be positive");
    if (!p.M.allFinite()) throw std::invalid_argument("box QP: non-finite coefficients");
    const double scale = std::max(1.0, p.M.cwiseAbs().maxCoeff());
    if ((p.M - p.M.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
        throw std::invalid_argument("box QP: M is not symmetric");
    if (options.initial && options.initial->size() != p.M.rows())
        throw std::invalid_argument("box QP: initial iterate has wrong dimension");
}

double residual_from_gradient(const Vector& delta, const Vector& grad, double upper) {
    double r = 0.0;
    for (Eigen::Index i = 0; i < delta.size(); ++i)
        r = std::max(r, std::abs(std::clamp(delta[i] + grad[i], 0.0, upper) - delta[i]));
    return r;
}

// Walks the face of the current free coordinates. When the gradient has a
// component in the null space of the free block, the objective is linear along
// it and that component is followed to the first bound; otherwise the min-norm
// Newton step is taken, truncated at the first bound. Each truncated step pins
// one more coordinate, so the walk ends after at most as many rounds as there
// are free coordinates. A step that lowers the objective is discarded.
bool polish(const BoxQpProblem& p, Vector& delta, Vector& grad) {
    bool improved = false;
    for (Eigen::Index round = 0; round <= delta.size(); ++round) {
        std::vector<Eigen::Index> free;
        for (Eigen::Index i = 0; i < delta.size(); ++i)
            if (delta[i] > 0.0 && delta[i] < p.upper) free.push_back(i);
        const auto m = static_cast<Eigen::Index>(free.size());
        if (m == 0) break;

        Matrix block(m, m);
        Vector g(m);
        for (Eigen::Index a = 0; a < m; ++a) {
            for (Eigen::Index b = 0; b < m; ++b) block(a, b) = p.M(free[a], free[b]);
            g[a] = grad[free[a]];
        }
        Eigen::CompleteOrthogonalDecomposition<Matrix> cod(block);
        cod.setThreshold(1e-10);
        const Vector newton = cod.solve(g);
        const Vector null_part = g - block * newton;
        const bool linear = null_part.norm() > 1e-9 * std::max(1.0, g.norm());
        const Vector step = linear ? null_part : newton;
        if (!step.allFinite() || step.norm() == 0.0) break;

        double t = linear ? std::numeric_limits<double>::infinity() : 1.0;
        for (Eigen::Index a = 0; a < m; ++a) {
            const double v = delta[free[a]];
            if (step[a] > 0.0) t = std::min(t, (p.upper - v) / step[a]);
            else if (step[a] < 0.0) t = std::min(t, -v / step[a]);
        }
        if (!(t > 0.0) || !std::isfinite(t)) break;

        Vector candidate = delta;
        for (Eigen::Index a = 0; a < m; ++a) {
            const double v = delta[free[a]] + t * step[a];
            // Snap the coordinate that limited the step exactly onto its bound.
            candidate[free[a]] = std::clamp(v, 0.0, p.upper);
            if (std::abs(v) <= 1e-14 * p.upper) candidate[free[a]] = 0.0;
            if (std::abs(v - p.upper) <= 1e-14 * p.upper) candidate[free[a]] = p.upper;
        }
        if (boxqp_objective(p, candidate) < boxqp_objective(p, delta)) break;
        delta = std::move(candidate);
        grad = Vector::Ones(delta.size()) - p.M * delta;
        improved = true;
        if (!linear && t >= 1.0) break;
    }
    return improved;
}

}  // namespace

double boxqp_objective(const BoxQpProblem& p, const Vector& delta) {
    return -0.5 * delta.dot(p.M * delta) + delta.sum();
}

double boxqp_kkt_residual(const BoxQpProblem& p, const Vector& delta) {
    if (delta.size() != p.M.rows()) throw std::invalid_argument("boxqp_kkt_residual: dimension mismatch");
    for (Eigen::Index i = 0; i < delta.size(); ++i)
        if (delta[i] < -1e-12 || delta[i] > p.upper + 1e-12)
            throw std::invalid_argument("boxqp_kkt_residual: iterate lies outside the box");
    const Vector grad = Vector::Ones(delta.size()) - p.M * delta;
    return residual_from_gradient(delta, grad, p.upper);
}

Solution solve_box_qp(const BoxQpProblem& p, const SolveOptions& options) {
    validate(p, options);
    const auto n = p.M.rows();
    const int max_sweeps = options.max_iter > 0 ? options.max_iter : 200;
    const double alpha = p.upper;

    Solution sol;
    Vector delta = options.initial ? options.initial->cwiseMax(0.0).cwiseMin(alpha).eval() : Vector::Zero(n);
    Vector grad = Vector::Ones(n) - p.M * delta;
    if (options.record_history) sol.history.push_back(boxqp_objective(p, delta));

    double residual = residual_from_gradient(delta, grad, alpha);
    int sweep = 0;
    while (residual > options.tol && sweep < max_sweeps) {
        ++sweep;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double old = delta[i];
            const double diag = p.M(i, i);
            double updated;
            if (diag > kTinyDiagonal) {
                updated = std::clamp(old + grad[i] / diag, 0.0, alpha);
            } else {
                // Linear in this coordinate: 1 - sum_{j != i} M_ij delta_j.
                updated = grad[i] + diag * old > 0.0 ? alpha : 0.0;
            }
            if (updated != old) grad.noalias() -= (updated - old) * p.M.col(i);
            delta[i] = updated;
        }
        grad = Vector::Ones(n) - p.M * delta;  // refresh to stop drift
        residual = residual_from_gradient(delta, grad, alpha);
        if (residual > options.tol && sweep % kPolishEvery == 0 && polish(p, delta, grad))
            residual = residual_from_gradient(delta, grad, alpha);
        if (options.record_history) sol.history.push_back(boxqp_objective(p, delta));
    }

    sol.x = std::move(delta);
    sol.report.iterations = sweep;
    sol.report.kkt_residual = residual;
    sol.report.objective = boxqp_objective(p, sol.x);
    sol.report.converged = residual <= options.tol;
    return sol;
}

}  // namespace sscl
