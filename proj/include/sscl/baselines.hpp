#pragma once

#include "sscl/data.hpp"
#include "sscl/optim.hpp"

#include <memory>
#include <vector>

namespace sscl {

/// Majority vote over the k nearest training points; ties go to the lower class id.
class KnnClassifier {
public:
    KnnClassifier(std::shared_ptr<const Dataset> train, int k);

    int predict(const Vector& x) const;
    int k() const { return k_; }

private:
    std::shared_ptr<const Dataset> train_;
    int k_;
};

/// Sparse-representation classifier: reconstruct the query from each class's
/// training points and pick the class with the smallest residual.
class SrbcClassifier {
public:
    SrbcClassifier(std::shared_ptr<const Dataset> train, double gamma, double beta = 1.0);

    int predict(const Vector& x) const;
    /// Squared reconstruction residual per class id (infinity for empty classes).
    std::vector<double> residuals(const Vector& x) const;
    double gamma() const { return gamma_; }

private:
    std::shared_ptr<const Dataset> train_;
    double gamma_;
    double beta_;
    std::vector<Matrix> dictionaries_;  // d x n_c per class
    std::vector<Matrix> grams_;         // 2 beta X_c' X_c + ridge
};

}  // namespace sscl
