#include "sscl/optim.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace sscl {

namespace {

constexpr double kSymmetryTol = 1e-10;
constexpr double kFallbackRidge = 1e-10;

double sign_of(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

void validate(const L1QuadraticProblem& p, const SolveOptions& options) {
    const auto k = p.q.size();
    if (p.P.rows() != k || p.P.cols() != k) throw std::invalid_argument("L1 quadratic: P must be k x k with k = |q|");
    if (!(p.gamma >= 0.0)) throw std::invalid_argument("L1 quadratic: gamma must be non-negative");
    if (!(options.tol > 0.0)) throw std::invalid_argument("L1 quadratic: tolerance must be positive");
    if (options.initial && options.initial->size() != k)
        throw std::invalid_argument("L1 quadratic: initial iterate has wrong dimension");
    if (!p.P.allFinite() || !p.q.allFinite()) throw std::invalid_argument("L1 quadratic: non-finite coefficients");
    const double scale = std::max(1.0, p.P.cwiseAbs().maxCoeff());
    if ((p.P - p.P.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol * scale)
        throw std::invalid_argument("L1 quadratic: P is not symmetric");
    for (Eigen::Index i = 0; i < k; ++i)
        if (p.P(i, i) < 0.0)
            throw IndefiniteProblem("L1 quadratic: negative diagonal entry in P", Vector::Unit(k, i));
}

// Solves the reduced system, adding a tiny ridge when it is numerically singular.
Vector solve_reduced(const Matrix& block, const Vector& rhs) {
    Eigen::LDLT<Matrix> ldlt(block);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || ldlt.rcond() < 1e-15) {
        Matrix ridged = block;
        ridged.diagonal().array() += kFallbackRidge;
        ldlt.compute(ridged);
    }
    Vector z = ldlt.solve(rhs);
    z += ldlt.solve(rhs - block * z);  // one step of iterative refinement
    return z;
}

class FeatureSign {
public:
    FeatureSign(const L1QuadraticProblem& p, Vector x) : p_(p), x_(std::move(x)) {
        theta_ = x_.unaryExpr([](double v) { return sign_of(v); });
        curvature_scale_ = std::max(1.0, p_.P.diagonal().maxCoeff());
    }

    const Vector& x() const { return x_; }
    Vector& theta() { return theta_; }

    // Returns false when the iterate is optimal on its current sign pattern.
    bool active_conditions_violated(const Vector& grad, double tol) const {
        for (Eigen::Index i = 0; i < x_.size(); ++i)
            if (x_[i] != 0.0 && std::abs(grad[i] + p_.gamma * sign_of(x_[i])) > tol) return true;
        return false;
    }

    // Most violating zero coordinate, or -1 when all lie in the dead zone.
    int most_violating_zero(const Vector& grad, double tol) const {
        int best = -1;
        double worst = tol;
        for (Eigen::Index i = 0; i < x_.size(); ++i) {
            if (x_[i] != 0.0) continue;
            const double excess = std::abs(grad[i]) - p_.gamma;
            if (excess > worst) {
                worst = excess;
                best = static_cast<int>(i);
            }
        }
        return best;
    }

    void step() {
        std::vector<Eigen::Index> active;
        for (Eigen::Index i = 0; i < theta_.size(); ++i)
            if (theta_[i] != 0.0) active.push_back(i);
        const auto m = static_cast<Eigen::Index>(active.size());
        if (m == 0) return;

        Matrix block(m, m);
        Vector rhs(m), current(m);
        for (Eigen::Index a = 0; a < m; ++a) {
            for (Eigen::Index b = 0; b < m; ++b) block(a, b) = p_.P(active[a], active[b]);
            rhs[a] = -(p_.q[active[a]] + p_.gamma * theta_[active[a]]);
            current[a] = x_[active[a]];
        }
        const Vector target = solve_reduced(block, rhs);
        const Vector dir = target - current;
        const double curvature = dir.dot(block * dir);
        if (curvature < -1e-10 * curvature_scale_ * dir.squaredNorm()) {
            Vector full = Vector::Zero(x_.size());
            for (Eigen::Index a = 0; a < m; ++a) full[active[a]] = dir[a];
            throw IndefiniteProblem("L1 quadratic: negative curvature along the sign-set step", std::move(full));
        }

        // Candidate step lengths: the full step plus every interior sign crossing.
        std::vector<double> steps{1.0};
        for (Eigen::Index a = 0; a < m; ++a) {
            if (current[a] != 0.0 && sign_of(target[a]) != sign_of(current[a])) {
                const double t = current[a] / (current[a] - target[a]);
                if (t > 0.0 && t < 1.0) steps.push_back(t);
            }
        }

        Vector best = x_;
        double best_obj = std::numeric_limits<double>::infinity();
        Vector trial = x_;
        for (double t : steps) {
            for (Eigen::Index a = 0; a < m; ++a) {
                double v = current[a] + t * dir[a];
                // Coordinates whose own crossing is at t land exactly on zero.
                if (current[a] != 0.0 && sign_of(target[a]) != sign_of(current[a]) &&
                    current[a] / (current[a] - target[a]) == t)
                    v = 0.0;
                trial[active[a]] = v;
            }
            const double obj = l1q_objective(p_, trial);
            if (obj < best_obj) {
                best_obj = obj;
                best = trial;
            }
        }
        x_ = std::move(best);
        theta_ = x_.unaryExpr([](double v) { return sign_of(v); });
    }

private:
    const L1QuadraticProblem& p_;
    Vector x_;
    Vector theta_;
    double curvature_scale_ = 1.0;
};

}  // namespace

double l1q_objective(const L1QuadraticProblem& p, const Vector& v) {
    return 0.5 * v.dot(p.P * v) + p.q.dot(v) + p.gamma * v.lpNorm<1>();
}

double l1q_kkt_residual(const L1QuadraticProblem& p, const Vector& v) {
    if (v.size() != p.q.size() || p.P.rows() != v.size()) throw std::invalid_argument("l1q_kkt_residual: dimension mismatch");
    const Vector grad = p.P * v + p.q;
    double residual = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        const double r = v[i] != 0.0 ? std::abs(grad[i] + p.gamma * sign_of(v[i]))
                                     : std::max(0.0, std::abs(grad[i]) - p.gamma);
        residual = std::max(residual, r);
    }
    return residual;
}

Solution solve_l1_quadratic(const L1QuadraticProblem& p, const SolveOptions& options) {
    validate(p, options);
    const int k = p.dim();
    const int max_iter = options.max_iter > 0 ? options.max_iter : std::max(1, 10 * k);
    // Gradients carry rounding error proportional to the linear term.
    const double tol = options.tol * std::max(1.0, p.q.size() > 0 ? p.q.cwiseAbs().maxCoeff() : 0.0);

    Solution sol;
    Vector start = options.initial ? *options.initial : Vector::Zero(k);
    if (k == 0) {
        sol.x = start;
        sol.report.converged = true;
        return sol;
    }

    if (p.gamma == 0.0) {
        // Pure quadratic: one smooth solve.
        if (options.record_history) sol.history.push_back(l1q_objective(p, start));
        sol.x = solve_reduced(p.P, -p.q);
        const Vector dir = sol.x - start;
        if (dir.dot(p.P * dir) < -1e-10 * std::max(1.0, p.P.diagonal().maxCoeff()) * dir.squaredNorm())
            throw IndefiniteProblem("L1 quadratic: negative curvature along the smooth step", dir);
        sol.report.iterations = 1;
        if (options.record_history) sol.history.push_back(l1q_objective(p, sol.x));
    } else {
        FeatureSign fs(p, std::move(start));
        if (options.record_history) sol.history.push_back(l1q_objective(p, fs.x()));
        int iter = 0;
        while (true) {
            const Vector grad = p.P * fs.x() + p.q;
            if (!fs.active_conditions_violated(grad, tol)) {
                const int entering = fs.most_violating_zero(grad, tol);
                if (entering < 0) break;
                fs.theta()[entering] = grad[entering] > 0.0 ? -1.0 : 1.0;
            }
            if (iter >= max_iter) break;
            ++iter;
            fs.step();
            if (options.record_history) sol.history.push_back(l1q_objective(p, fs.x()));
        }
        sol.x = fs.x();
        sol.report.iterations = iter;
    }

    sol.report.kkt_residual = l1q_kkt_residual(p, sol.x);
    sol.report.objective = l1q_objective(p, sol.x);
    sol.report.converged = sol.report.kkt_residual <= tol;
    return sol;
}

}  // namespace sscl
