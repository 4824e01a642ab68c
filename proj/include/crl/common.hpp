#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace crl {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using BoolMatrix = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;
using BoolVector = Eigen::Array<bool, Eigen::Dynamic, 1>;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or out-of-range configuration. Maps to CLI exit code 2.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// An input violates the documented precondition of an operation.
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// A fixed-point loop ran out of budget or diverged. Maps to CLI exit code 3.
class NonConvergenceError : public Error {
public:
    NonConvergenceError(const std::string& what, double residual, std::size_t iterations)
        : Error(what + " (residual " + std::to_string(residual) + " after " +
                std::to_string(iterations) + " iterations)"),
          residual_(residual), iterations_(iterations) {}

    double residual() const noexcept { return residual_; }
    std::size_t iterations() const noexcept { return iterations_; }

private:
    double residual_;
    std::size_t iterations_;
};

/// Largest absolute entry of a - b.
inline double sup_norm_diff(const MatrixXd& a, const MatrixXd& b) {
    return (a - b).cwiseAbs().maxCoeff();
}

/// Index of the largest entry; entries within `tie_tolerance` of the maximum
/// are treated as tied and the lowest index wins.
template <typename Row>
int argmax_lowest(const Row& row, double tie_tolerance = 1e-9) {
    double best = row(0);
    for (Eigen::Index i = 1; i < row.size(); ++i) best = std::max(best, double(row(i)));
    for (Eigen::Index i = 0; i < row.size(); ++i) {
        if (row(i) >= best - tie_tolerance) return static_cast<int>(i);
    }
    return 0;
}

}  // namespace crl
