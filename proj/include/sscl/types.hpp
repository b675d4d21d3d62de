#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace sscl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using IndexMatrix = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Exception categories map onto the CLI exit codes (config 1, data 2, solver 3).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class DataError : public Error {
public:
    using Error::Error;
};

class SolverError : public Error {
public:
    using Error::Error;
};

/// Raised when a sign-set subproblem shows negative curvature.
class IndefiniteProblem : public SolverError {
public:
    IndefiniteProblem(const std::string& what, Vector direction)
        : SolverError(what), direction_(std::move(direction)) {}

    const Vector& direction() const noexcept { return direction_; }

private:
    Vector direction_;
};

}  // namespace sscl
