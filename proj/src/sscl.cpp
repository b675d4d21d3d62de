#include "sscl/sscl.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

namespace sscl {

void Hyperparams::validate() const {
    if (!(alpha > 0.0)) throw ConfigError("alpha must be positive");
    if (!(beta > 0.0)) throw ConfigError("beta must be positive");
    if (!(gamma >= 0.0)) throw ConfigError("gamma must be non-negative");
    if (k < 1) throw ConfigError("k must be at least 1");
    if (max_outer_iter < 1) throw ConfigError("iteration count must be at least 1");
    if (!(outer_tol >= 0.0)) throw ConfigError("outer tolerance must be non-negative");
    if (!(solver_tol > 0.0)) throw ConfigError("solver tolerance must be positive");
    if (!convex())
        throw ConfigError("alpha^2 < 2*beta is required for convex coefficient subproblems (alpha=" +
                          std::to_string(alpha) + ", beta=" + std::to_string(beta) + ")");
}

void TrainState::set_coeffs(int i, const Vector& v) {
    coeffs.col(i) = v;
    reconstructions.col(i) = context.context_matrices[i] * v;
}

void TrainState::refresh_reconstructions() {
    reconstructions.resize(points.rows(), points.cols());
    for (int i = 0; i < size(); ++i) reconstructions.col(i) = context.context_matrices[i] * coeffs.col(i);
}

L1QuadraticProblem assemble_v_subproblem(const Matrix& context, const Vector& x, double y, double delta,
                                         const Vector& w_without_point, double beta, double gamma) {
    const double curvature = 2.0 * beta - delta * delta;
    if (!(curvature > 0.0)) throw ConfigError("coefficient subproblem is not convex: 2*beta - delta^2 <= 0");
    const Matrix gram = context.transpose() * context;
    L1QuadraticProblem p;
    p.P = curvature * gram;
    p.P.diagonal().array() += kSubproblemRidge;
    p.q = -delta * y * (context.transpose() * w_without_point) - 2.0 * beta * (context.transpose() * x);
    p.gamma = gamma;
    return p;
}

L1QuadraticProblem assemble_v_subproblem(const TrainState& state, const Hyperparams& hyper, int i) {
    const Vector w_without = recover_w(state) - state.delta[i] * state.labels[i] * state.reconstructions.col(i);
    return assemble_v_subproblem(state.context.context_matrices[i], state.points.col(i), state.labels[i],
                                 state.delta[i], w_without, hyper.beta, hyper.gamma);
}

BoxQpProblem assemble_delta_qp(const TrainState& state, const Hyperparams& hyper) {
    const Matrix signed_recon = state.reconstructions * state.labels.asDiagonal();
    BoxQpProblem p;
    p.M = signed_recon.transpose() * signed_recon;
    p.upper = hyper.alpha;
    return p;
}

bool coefficients_jointly_bounded(const Vector& delta, double beta) { return delta.squaredNorm() < 2.0 * beta; }

Vector recover_w(const TrainState& state) {
    return state.reconstructions * state.delta.cwiseProduct(state.labels);
}

double dual_objective(const TrainState& state, const Hyperparams& hyper) {
    const Vector w = recover_w(state);
    return -0.5 * w.squaredNorm() + hyper.beta * (state.points - state.reconstructions).squaredNorm() +
           hyper.gamma * state.coeffs.cwiseAbs().sum() + state.delta.sum();
}

double primal_objective(const TrainState& state, const Vector& w, const Hyperparams& hyper) {
    if (w.size() != state.points.rows()) throw std::invalid_argument("primal_objective: w has wrong dimension");
    const Vector margins = (state.reconstructions.transpose() * w).cwiseProduct(state.labels);
    const double hinge = (1.0 - margins.array()).max(0.0).sum();
    return 0.5 * w.squaredNorm() + hyper.alpha * hinge +
           hyper.beta * (state.points - state.reconstructions).squaredNorm() +
           hyper.gamma * state.coeffs.cwiseAbs().sum();
}

bool TrainTrace::monotone() const {
    int direction = 0;
    for (std::size_t t = 1; t < rows.size(); ++t) {
        const double diff = rows[t].dual - rows[t - 1].dual;
        const int s = diff > 0.0 ? 1 : (diff < 0.0 ? -1 : 0);
        if (s == 0) continue;
        if (direction != 0 && s != direction) return false;
        direction = s;
    }
    return true;
}

TrainState initial_state(const BinaryTask& task, const Hyperparams& hyper) {
    hyper.validate();
    const Dataset& ds = *task.dataset;
    const int n = ds.n();
    if (task.binary_labels.size() != n) throw std::invalid_argument("binary labels do not match the dataset");
    const bool has_pos = (task.binary_labels.array() > 0.0).any();
    const bool has_neg = (task.binary_labels.array() < 0.0).any();
    if (!has_pos || !has_neg) throw DataError("training task contains a single class");
    if (hyper.k > n - 1)
        throw ConfigError("context size k=" + std::to_string(hyper.k) + " exceeds n-1=" + std::to_string(n - 1));
    if (!ds.features.allFinite()) throw DataError("training features contain missing or non-finite values");

    TrainState state;
    state.points = ds.features.transpose();
    state.labels = task.binary_labels;
    state.context = build_context_index(ds.features, hyper.k);
    state.coeffs = Matrix::Zero(hyper.k, n);
    state.reconstructions = Matrix::Zero(ds.d(), n);

    std::mt19937_64 rng(hyper.seed);
    state.delta.resize(n);
    for (int i = 0; i < n; ++i) state.delta[i] = hyper.alpha * static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return state;
}

TrainResult train(const BinaryTask& task, const Hyperparams& hyper, const Standardizer& standardizer,
                  const TrainObserver& observer) {
    using Clock = std::chrono::steady_clock;
    TrainState state = initial_state(task, hyper);
    const int n = state.size();

    SolveOptions l1_options;
    l1_options.tol = hyper.solver_tol;
    SolveOptions box_options;
    box_options.tol = hyper.solver_tol;

    TrainResult result;
    double previous = dual_objective(state, hyper);
    Vector w = recover_w(state);
    double step = 1.0;
    double last_move = 0.0;

    for (int t = 1; t <= hyper.max_outer_iter; ++t) {
        const auto start = Clock::now();
        TraceRow row;
        row.iteration = t;

        // Coefficients, one point at a time against the freshest classifier.
        for (int i = 0; i < n; ++i) {
            const double weight = state.delta[i] * state.labels[i];
            const Vector w_without = w - weight * state.reconstructions.col(i);
            const auto problem = assemble_v_subproblem(state.context.context_matrices[i], state.points.col(i),
                                                       state.labels[i], state.delta[i], w_without, hyper.beta,
                                                       hyper.gamma);
            l1_options.initial = state.coeffs.col(i);
            const Solution sol = solve_l1_quadratic(problem, l1_options);
            if (!sol.report.converged)
                throw SolverError("coefficient solve did not converge (iteration " + std::to_string(t) + ", point " +
                                  std::to_string(i) + ", KKT residual " + std::to_string(sol.report.kkt_residual) +
                                  ")");
            state.set_coeffs(i, sol.x);
            w = w_without + weight * state.reconstructions.col(i);
            row.mean_l1_kkt += sol.report.kkt_residual / n;
            row.max_l1_kkt = std::max(row.max_l1_kkt, sol.report.kkt_residual);
            if (observer) observer(TrainEvent::coefficient_update, i, state);
        }

        // Multipliers for the fixed reconstructions. The dual is concave in delta,
        // so any step toward the box maximiser keeps it from decreasing.
        box_options.initial = state.delta;
        const BoxQpProblem qp = assemble_delta_qp(state, hyper);
        const Solution box = solve_box_qp(qp, box_options);
        if (!box.report.converged)
            throw SolverError("multiplier solve did not converge (iteration " + std::to_string(t) +
                              ", KKT residual " + std::to_string(box.report.kkt_residual) + ")");
        row.multiplier_gap = box.report.objective - boxqp_objective(qp, state.delta);
        row.multiplier_step = step;
        state.delta += step * (box.x - state.delta);
        state.delta = state.delta.cwiseMax(0.0).cwiseMin(hyper.alpha);
        w = recover_w(state);
        if (observer) observer(TrainEvent::multiplier_update, -1, state);

        row.box_kkt = box.report.kkt_residual;
        row.box_sweeps = box.report.iterations;
        row.dual = dual_objective(state, hyper);
        row.primal = primal_objective(state, w, hyper);
        row.seconds = std::chrono::duration<double>(Clock::now() - start).count();
        result.trace.rows.push_back(row);

        const double change = std::abs(row.dual - previous) / std::max(1.0, std::abs(previous));
        // A sign change in successive dual moves marks an overshooting best response.
        const double move = row.dual - previous;
        if (hyper.damp_oscillation && move * last_move < 0.0) step *= 0.5;
        last_move = move;
        previous = row.dual;
        if (change < hyper.outer_tol) {
            result.trace.stopped_early = t < hyper.max_outer_iter;
            break;
        }
    }

    SsclModel& model = result.model;
    model.w = recover_w(state);
    model.coeffs = std::move(state.coeffs);
    model.delta = std::move(state.delta);
    model.hyper = hyper;
    model.train_features = task.dataset->features;
    model.train_labels = task.binary_labels;
    model.standardizer = standardizer;
    return result;
}

TrainResult train(const BinaryTask& task, const Hyperparams& hyper) {
    return train(task, hyper, Standardizer::identity(task.dataset->d()));
}

namespace {

Vector solve_conditional(const SsclModel& model, const Matrix& context, const Vector& x, double y) {
    const double beta = model.hyper.beta;
    L1QuadraticProblem p;
    p.P = 2.0 * beta * (context.transpose() * context);
    p.P.diagonal().array() += kSubproblemRidge;
    p.q = -y * (context.transpose() * model.w) - 2.0 * beta * (context.transpose() * x);
    p.gamma = model.hyper.gamma;
    SolveOptions options;
    options.tol = model.hyper.solver_tol;
    const Solution sol = solve_l1_quadratic(p, options);
    if (!sol.report.converged)
        throw SolverError("test-time coefficient solve did not converge (KKT residual " +
                          std::to_string(sol.report.kkt_residual) + ")");
    return sol.x;
}

}  // namespace

Vector conditional_coeffs(const SsclModel& model, const Vector& x, double y) {
    const Vector z = apply_standardizer(model.standardizer, x);
    const auto hood = query_context(model.train_features, z, model.hyper.k);
    return solve_conditional(model, hood.context, z, y);
}

Prediction predict(const SsclModel& model, const Vector& x) {
    const Vector z = apply_standardizer(model.standardizer, x);
    const auto hood = query_context(model.train_features, z, model.hyper.k);
    auto label_cost = [&](double y) {
        const Vector v = solve_conditional(model, hood.context, z, y);
        return -y * model.w.dot(hood.context * v);
    };
    const double pos = label_cost(1.0);
    const double neg = label_cost(-1.0);
    Prediction out;
    out.score = neg - pos;
    out.label = std::abs(pos - neg) <= 1e-12 || pos < neg ? 1 : -1;
    return out;
}

double mean_support_size(const Matrix& coeffs) {
    if (coeffs.cols() == 0) return 0.0;
    return static_cast<double>((coeffs.array().abs() > 1e-10).count()) / static_cast<double>(coeffs.cols());
}

EnsembleResult train_one_vs_rest(const Dataset& raw_train, const Hyperparams& hyper) {
    const Standardizer standardizer = fit_standardizer(raw_train);
    auto standardized = std::make_shared<const Dataset>(apply_standardizer(standardizer, raw_train));

    EnsembleResult out;
    out.ensemble.class_count = raw_train.class_count();
    out.ensemble.class_names = raw_train.class_names;
    for (const BinaryTask& task : one_vs_rest_tasks(standardized)) {
        if (!(task.binary_labels.array() > 0.0).any()) continue;  // class absent from this training split
        auto result = train(task, hyper, standardizer);
        out.ensemble.positive_classes.push_back(task.positive_class);
        out.ensemble.models.push_back(std::move(result.model));
        out.traces.push_back(std::move(result.trace));
    }
    return out;
}

int select_class(std::span<const double> scores, std::span<const int> class_ids) {
    if (scores.empty() || scores.size() != class_ids.size())
        throw std::invalid_argument("select_class: need one class id per score");
    std::size_t best = 0;
    for (std::size_t m = 1; m < scores.size(); ++m)
        if (scores[m] > scores[best] || (scores[m] == scores[best] && class_ids[m] < class_ids[best])) best = m;
    return class_ids[best];
}

int predict_multiclass(const SsclEnsemble& ensemble, const Vector& x) {
    if (ensemble.models.empty()) throw std::invalid_argument("predict_multiclass: no models");
    if (ensemble.class_count == 2 && ensemble.models.size() == 1) {
        const int positive = ensemble.positive_classes.front();
        return predict(ensemble.models.front(), x).label > 0 ? positive : 1 - positive;
    }
    std::vector<double> scores;
    scores.reserve(ensemble.models.size());
    for (const auto& model : ensemble.models) scores.push_back(predict(model, x).score);
    return select_class(scores, ensemble.positive_classes);
}

}  // namespace sscl
