#pragma once

#include "sscl/context.hpp"
#include "sscl/data.hpp"
#include "sscl/optim.hpp"
#include "sscl/types.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace sscl {

/// Ridge added to every assembled coefficient subproblem.
inline constexpr double kSubproblemRidge = 1e-8;

struct Hyperparams {
    double alpha = 1.0;  // hinge-loss weight
    double beta = 10.0;  // reconstruction weight
    double gamma = 0.1;  // sparsity weight
    int k = 5;           // context size
    int max_outer_iter = 100;
    double outer_tol = 1e-6;
    std::uint64_t seed = 0;
    double solver_tol = 1e-8;
    // Halve the multiplier step whenever successive dual moves change sign.
    // Off gives the undamped alternation, which can settle into a 2-cycle.
    bool damp_oscillation = true;

    /// alpha^2 < 2 beta keeps every coefficient subproblem convex.
    bool convex() const { return alpha * alpha < 2.0 * beta; }
    /// Throws ConfigError on any invalid field.
    void validate() const;
};

/// Mutable state of the alternating optimisation.
///
/// Invariant: column i of `reconstructions` equals
/// `context.context_matrices[i] * coeffs.col(i)`; use set_coeffs to keep it.
struct TrainState {
    Matrix points;  // d x n, column i is training point i
    Vector labels;  // +1 / -1
    ContextIndex context;
    Matrix coeffs;           // k x n
    Vector delta;            // multipliers in [0, alpha]
    Matrix reconstructions;  // d x n

    int size() const { return static_cast<int>(points.cols()); }
    void set_coeffs(int i, const Vector& v);
    void refresh_reconstructions();
};

L1QuadraticProblem assemble_v_subproblem(const Matrix& context, const Vector& x, double y, double delta,
                                         const Vector& w_without_point, double beta, double gamma);
L1QuadraticProblem assemble_v_subproblem(const TrainState& state, const Hyperparams& hyper, int i);
BoxQpProblem assemble_delta_qp(const TrainState& state, const Hyperparams& hyper);

Vector recover_w(const TrainState& state);
double dual_objective(const TrainState& state, const Hyperparams& hyper);
double primal_objective(const TrainState& state, const Vector& w, const Hyperparams& hyper);

struct TraceRow {
    int iteration = 0;
    double dual = 0.0;
    double primal = 0.0;
    double mean_l1_kkt = 0.0;
    double max_l1_kkt = 0.0;
    double box_kkt = 0.0;
    int box_sweeps = 0;
    double multiplier_step = 1.0;  // fraction of the way to the box maximiser
    double multiplier_gap = 0.0;   // dual gain a full step would have given
    double seconds = 0.0;
};

struct TrainTrace {
    std::vector<TraceRow> rows;
    bool stopped_early = false;

    /// True when successive dual values never change direction.
    bool monotone() const;
};

struct SsclModel {
    Vector w;
    Matrix coeffs;
    Vector delta;
    Hyperparams hyper;
    Matrix train_features;  // n x d, standardized space
    Vector train_labels;    // +1 / -1
    Standardizer standardizer;
};

struct TrainResult {
    SsclModel model;
    TrainTrace trace;
};

enum class TrainEvent { coefficient_update, multiplier_update };
using TrainObserver = std::function<void(TrainEvent event, int point, const TrainState& state)>;

/// Sufficient condition for the coefficient terms to be bounded below jointly
/// over all points: sum of delta_i^2 < 2 beta. When it fails with many
/// multipliers at alpha, the alternation can grow w without limit; n alpha^2 <
/// 2 beta guarantees it for every feasible delta.
bool coefficients_jointly_bounded(const Vector& delta, double beta);

/// Builds the initial state: context index, zero coefficients, seeded uniform multipliers.
TrainState initial_state(const BinaryTask& task, const Hyperparams& hyper);

/// Alternating optimisation of coefficients (Gauss-Seidel over points) and multipliers.
///
/// `task.dataset` must already be in the standardized space described by
/// `standardizer`; the standardizer is stored on the model and applied to
/// query points at prediction time.
TrainResult train(const BinaryTask& task, const Hyperparams& hyper, const Standardizer& standardizer,
                  const TrainObserver& observer = {});
TrainResult train(const BinaryTask& task, const Hyperparams& hyper);

/// Class-conditional coefficients for a raw (unstandardized) query.
Vector conditional_coeffs(const SsclModel& model, const Vector& x, double y);

struct Prediction {
    int label = 1;       // +1 / -1
    double score = 0.0;  // positive favours +1
};

Prediction predict(const SsclModel& model, const Vector& x);

/// Mean number of coefficients with magnitude above 1e-10 per point.
double mean_support_size(const Matrix& coeffs);

/// One binary model per class (a single model for two-class data).
struct SsclEnsemble {
    int class_count = 0;
    std::vector<std::string> class_names;
    std::vector<int> positive_classes;  // class id scored by models[m]
    std::vector<SsclModel> models;
};

struct EnsembleResult {
    SsclEnsemble ensemble;
    std::vector<TrainTrace> traces;
};

/// Standardizes `raw_train` on itself and trains one-vs-rest models. Classes
/// absent from the training data get no model and are never predicted.
EnsembleResult train_one_vs_rest(const Dataset& raw_train, const Hyperparams& hyper);

/// Class id with the largest score; ties go to the lower class id.
int select_class(std::span<const double> scores, std::span<const int> class_ids);

int predict_multiclass(const SsclEnsemble& ensemble, const Vector& x);

}  // namespace sscl
