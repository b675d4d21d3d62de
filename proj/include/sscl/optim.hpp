#pragma once

#include "sscl/types.hpp"

#include <optional>
#include <vector>

namespace sscl {

/// minimize 0.5 v'Pv + q'v + gamma * |v|_1
struct L1QuadraticProblem {
    Matrix P;
    Vector q;
    double gamma = 0.0;

    int dim() const { return static_cast<int>(q.size()); }
};

/// maximize -0.5 d'Md + sum(d)  subject to  0 <= d_i <= upper
struct BoxQpProblem {
    Matrix M;
    double upper = 1.0;

    int dim() const { return static_cast<int>(M.rows()); }
};

struct SolverReport {
    int iterations = 0;
    double kkt_residual = 0.0;
    double objective = 0.0;
    bool converged = false;
};

struct SolveOptions {
    double tol = 1e-8;  // the L1 solver scales this by max(1, max|q_i|)
    int max_iter = 0;  // 0 selects the solver default
    bool record_history = false;
    std::optional<Vector> initial;
};

struct Solution {
    Vector x;
    SolverReport report;
    std::vector<double> history;  // objective after each iteration, when requested
};

double l1q_objective(const L1QuadraticProblem& p, const Vector& v);
double l1q_kkt_residual(const L1QuadraticProblem& p, const Vector& v);

/// Active-sign-set (feature-sign) minimisation of an L1-regularised convex quadratic.
///
/// Each iteration solves the smooth problem restricted to the current sign
/// pattern and line-searches back to the best sign crossing, so the
/// objective never increases. Default iteration budget is 10 * dim reduced
/// solves. Throws IndefiniteProblem on negative curvature along a step.
Solution solve_l1_quadratic(const L1QuadraticProblem& p, const SolveOptions& options = {});

double boxqp_objective(const BoxQpProblem& p, const Vector& delta);
double boxqp_kkt_residual(const BoxQpProblem& p, const Vector& delta);

/// Projected coordinate ascent in ascending index order with exact
/// per-coordinate maximisation; every few sweeps an active-set step on the
/// free coordinates accelerates the tail. Default budget is 200 sweeps.
Solution solve_box_qp(const BoxQpProblem& p, const SolveOptions& options = {});

}  // namespace sscl
