#pragma once

#include "pansharp/error.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace pansharp {

/// min ||design * x - target||_2  subject to  lower <= x <= upper.
struct BoundedLsqProblem {
    Eigen::MatrixXd design; // I x K
    Eigen::VectorXd target; // I
    Eigen::VectorXd lower;  // K
    Eigen::VectorXd upper;  // K

    /// Throws InvalidArgument / DimensionError when the problem is malformed.
    void validate() const;
};

enum class BoundStatus { free, at_lower, at_upper };

struct VariableReport {
    BoundStatus status = BoundStatus::free;
    /// Component of designᵀ (design x - target), the gradient of half the squared residual.
    double gradient = 0.0;
};

struct BoundedLsqSolution {
    Eigen::VectorXd weights;
    double residual_norm = 0.0;
    std::vector<VariableReport> kkt_report;
    /// Absolute gradient tolerance the report was certified against.
    double kkt_tol = 0.0;
    int iterations = 0;

    /// True when every variable satisfies its KKT sign condition within kkt_tol.
    bool kkt_satisfied() const;
};

struct BvlsOptions {
    /// Tolerance relative to max_k |(designᵀ target)_k|.
    double relative_kkt_tol = 1e-10;
    /// 0 selects 10 * K^2.
    int max_iters = 0;
};

/// Raised when the active-set iteration runs out of budget. Carries the best
/// feasible iterate found so far.
class SolverError : public Error {
public:
    SolverError(const std::string& what, BoundedLsqSolution best)
        : Error(what), best_(std::move(best)) {}
    const BoundedLsqSolution& best_iterate() const { return best_; }

private:
    BoundedLsqSolution best_;
};

/// Bounded-variable least squares by an active-set method (Stark & Parker style).
/// Every variable starts at its lower bound, so the result does not depend on any
/// initial guess. Rank-deficient free sets use a least-norm sub-solve.
BoundedLsqSolution bvls_solve(const BoundedLsqProblem& problem, const BvlsOptions& options = {});

/// Gradient, residual norm and per-variable status for an arbitrary feasible point.
BoundedLsqSolution certify(const BoundedLsqProblem& problem, const Eigen::VectorXd& x,
                           double kkt_tol);

} // namespace pansharp
