#include "sscl/baselines.hpp"

#include "sscl/context.hpp"
#include "sscl/sscl.hpp"

#include <algorithm>
#include <limits>

namespace sscl {

KnnClassifier::KnnClassifier(std::shared_ptr<const Dataset> train, int k) : train_(std::move(train)), k_(k) {
    if (k_ < 1 || k_ > train_->n())
        throw ConfigError("KNN k=" + std::to_string(k_) + " must lie in [1, " + std::to_string(train_->n()) + "]");
    if (!train_->features.allFinite()) throw DataError("KNN training features contain non-finite values");
}

int KnnClassifier::predict(const Vector& x) const {
    const auto hood = query_context(*train_, x, k_);
    const int classes = std::max(train_->class_count(), *std::max_element(train_->labels.begin(), train_->labels.end()) + 1);
    std::vector<int> votes(classes, 0);
    for (int id : hood.ids) ++votes[train_->labels[id]];
    return static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());
}

SrbcClassifier::SrbcClassifier(std::shared_ptr<const Dataset> train, double gamma, double beta)
    : train_(std::move(train)), gamma_(gamma), beta_(beta) {
    if (!(gamma_ >= 0.0)) throw ConfigError("SRBC gamma must be non-negative");
    if (!(beta_ > 0.0)) throw ConfigError("SRBC beta must be positive");
    if (!train_->features.allFinite()) throw DataError("SRBC training features contain non-finite values");
    const int classes = std::max(train_->class_count(), *std::max_element(train_->labels.begin(), train_->labels.end()) + 1);
    std::vector<std::vector<int>> members(classes);
    for (int i = 0; i < train_->n(); ++i) members[train_->labels[i]].push_back(i);
    for (const auto& ids : members) {
        Matrix dict(train_->d(), static_cast<Eigen::Index>(ids.size()));
        for (std::size_t c = 0; c < ids.size(); ++c) dict.col(static_cast<Eigen::Index>(c)) = train_->features.row(ids[c]).transpose();
        Matrix gram = 2.0 * beta_ * (dict.transpose() * dict);
        gram.diagonal().array() += kSubproblemRidge;
        dictionaries_.push_back(std::move(dict));
        grams_.push_back(std::move(gram));
    }
}

std::vector<double> SrbcClassifier::residuals(const Vector& x) const {
    if (x.size() != train_->d()) throw std::invalid_argument("SRBC: query dimension mismatch");
    if (!x.allFinite()) throw DataError("SRBC: query contains non-finite values");
    std::vector<double> out;
    out.reserve(dictionaries_.size());
    for (std::size_t c = 0; c < dictionaries_.size(); ++c) {
        const Matrix& dict = dictionaries_[c];
        if (dict.cols() == 0) {
            out.push_back(std::numeric_limits<double>::infinity());
            continue;
        }
        L1QuadraticProblem p{grams_[c], -2.0 * beta_ * (dict.transpose() * x), gamma_};
        const Solution sol = solve_l1_quadratic(p);
        if (!sol.report.converged)
            throw SolverError("SRBC reconstruction did not converge for class " + std::to_string(c) +
                              " (KKT residual " + std::to_string(sol.report.kkt_residual) + ")");
        out.push_back((x - dict * sol.x).squaredNorm());
    }
    return out;
}

int SrbcClassifier::predict(const Vector& x) const {
    const auto res = residuals(x);
    return static_cast<int>(std::min_element(res.begin(), res.end()) - res.begin());
}

}  // namespace sscl
