#include "pansharp/bvls.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pansharp {

void BoundedLsqProblem::validate() const {
    const auto rows = design.rows();
    const auto cols = design.cols();
    if (rows < 1 || cols < 1) {
        throw DimensionError("bvls: design must be at least 1x1");
    }
    if (target.size() != rows) {
        throw DimensionError("bvls: target length " + std::to_string(target.size()) +
                             " does not match design rows " + std::to_string(rows));
    }
    if (lower.size() != cols || upper.size() != cols) {
        throw DimensionError("bvls: bound vectors must have one entry per column");
    }
    if (!design.allFinite() || !target.allFinite() || !lower.allFinite() || !upper.allFinite()) {
        throw InvalidArgument("bvls: problem contains non-finite entries");
    }
    for (Eigen::Index k = 0; k < cols; ++k) {
        if (lower[k] > upper[k]) {
            throw InvalidArgument("bvls: lower bound exceeds upper bound for variable " +
                                  std::to_string(k));
        }
    }
}

bool BoundedLsqSolution::kkt_satisfied() const {
    for (const auto& v : kkt_report) {
        switch (v.status) {
        case BoundStatus::free:
            if (std::abs(v.gradient) > kkt_tol) return false;
            break;
        case BoundStatus::at_lower:
            if (v.gradient < -kkt_tol) return false;
            break;
        case BoundStatus::at_upper:
            if (v.gradient > kkt_tol) return false;
            break;
        }
    }
    return true;
}

namespace {

double absolute_tolerance(const BoundedLsqProblem& p, double relative) {
    double scale = (p.design.transpose() * p.target).lpNorm<Eigen::Infinity>();
    if (scale == 0.0) {
        scale = p.design.colwise().squaredNorm().maxCoeff();
    }
    if (scale == 0.0) {
        scale = 1.0;
    }
    return relative * scale;
}

} // namespace

BoundedLsqSolution certify(const BoundedLsqProblem& problem, const Eigen::VectorXd& x,
                           double kkt_tol) {
    BoundedLsqSolution s;
    s.weights = x;
    const Eigen::VectorXd residual = problem.design * x - problem.target;
    s.residual_norm = residual.norm();
    const Eigen::VectorXd gradient = problem.design.transpose() * residual;
    s.kkt_tol = kkt_tol;
    s.kkt_report.resize(static_cast<std::size_t>(x.size()));
    for (Eigen::Index k = 0; k < x.size(); ++k) {
        auto& r = s.kkt_report[static_cast<std::size_t>(k)];
        r.gradient = gradient[k];
        if (x[k] <= problem.lower[k]) {
            r.status = BoundStatus::at_lower;
        } else if (x[k] >= problem.upper[k]) {
            r.status = BoundStatus::at_upper;
        } else {
            r.status = BoundStatus::free;
        }
    }
    return s;
}

BoundedLsqSolution bvls_solve(const BoundedLsqProblem& problem, const BvlsOptions& options) {
    problem.validate();
    if (!(options.relative_kkt_tol > 0.0)) {
        throw InvalidArgument("bvls: kkt tolerance must be positive");
    }

    const Eigen::MatrixXd& a = problem.design;
    const Eigen::VectorXd& b = problem.target;
    const Eigen::VectorXd& lo = problem.lower;
    const Eigen::VectorXd& hi = problem.upper;
    const Eigen::Index n = a.cols();
    const double tol = absolute_tolerance(problem, options.relative_kkt_tol);
    const int max_iters = options.max_iters > 0 ? options.max_iters
                                                : static_cast<int>(10 * n * n);

    enum class State { free, lower, upper };
    std::vector<State> state(static_cast<std::size_t>(n), State::lower);
    Eigen::VectorXd x = lo;

    // Variables that were freed but whose sub-solve immediately pushed them back
    // onto their bound; skipped until x moves again.
    std::vector<bool> blocked(static_cast<std::size_t>(n), false);
    int iterations = 0;

    auto fail = [&](const std::string& why) -> BoundedLsqSolution {
        auto best = certify(problem, x, tol);
        best.iterations = iterations;
        throw SolverError("bvls: " + why + " after " + std::to_string(iterations) + " iterations",
                          std::move(best));
    };

    for (;;) {
        const Eigen::VectorXd neg_grad = a.transpose() * (b - a * x);

        Eigen::Index pick = -1;
        double best = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) {
            const auto ku = static_cast<std::size_t>(k);
            if (state[ku] == State::free || blocked[ku] || lo[k] == hi[k]) continue;
            const bool wants_up = state[ku] == State::lower && neg_grad[k] > tol;
            const bool wants_down = state[ku] == State::upper && neg_grad[k] < -tol;
            // strict '>' keeps the lowest index on ties
            if ((wants_up || wants_down) && std::abs(neg_grad[k]) > best) {
                best = std::abs(neg_grad[k]);
                pick = k;
            }
        }
        if (pick < 0) break;

        const State freed_from = state[static_cast<std::size_t>(pick)];
        state[static_cast<std::size_t>(pick)] = State::free;
        bool first_solve = true;

        for (;;) {
            if (++iterations > max_iters) {
                return fail("iteration limit exceeded");
            }

            std::vector<Eigen::Index> free_idx;
            for (Eigen::Index k = 0; k < n; ++k) {
                if (state[static_cast<std::size_t>(k)] == State::free) free_idx.push_back(k);
            }
            if (free_idx.empty()) break;

            const auto nf = static_cast<Eigen::Index>(free_idx.size());
            Eigen::MatrixXd a_free(a.rows(), nf);
            Eigen::VectorXd rhs = b;
            for (Eigen::Index j = 0; j < nf; ++j) {
                a_free.col(j) = a.col(free_idx[static_cast<std::size_t>(j)]);
            }
            for (Eigen::Index k = 0; k < n; ++k) {
                if (state[static_cast<std::size_t>(k)] != State::free) rhs -= x[k] * a.col(k);
            }
            const Eigen::VectorXd z = a_free.completeOrthogonalDecomposition().solve(rhs);

            if (first_solve) {
                first_solve = false;
                // The freed variable must leave its bound in the descent direction.
                Eigen::Index j = std::find(free_idx.begin(), free_idx.end(), pick) - free_idx.begin();
                const bool wrong_way = freed_from == State::lower ? z[j] <= lo[pick]
                                                                  : z[j] >= hi[pick];
                if (wrong_way) {
                    state[static_cast<std::size_t>(pick)] = freed_from;
                    blocked[static_cast<std::size_t>(pick)] = true;
                    break;
                }
            }

            double alpha = 1.0;
            Eigen::Index limiting = -1;
            for (Eigen::Index j = 0; j < nf; ++j) {
                const Eigen::Index k = free_idx[static_cast<std::size_t>(j)];
                double step = 1.0;
                if (z[j] < lo[k]) {
                    step = (lo[k] - x[k]) / (z[j] - x[k]);
                } else if (z[j] > hi[k]) {
                    step = (hi[k] - x[k]) / (z[j] - x[k]);
                } else {
                    continue;
                }
                step = std::clamp(step, 0.0, 1.0);
                if (step < alpha || limiting < 0) {
                    alpha = step;
                    limiting = k;
                }
            }

            if (limiting < 0) {
                for (Eigen::Index j = 0; j < nf; ++j) x[free_idx[static_cast<std::size_t>(j)]] = z[j];
                std::fill(blocked.begin(), blocked.end(), false);
                break;
            }

            // Step to the first bound hit and move every variable that reached a bound.
            for (Eigen::Index j = 0; j < nf; ++j) {
                const Eigen::Index k = free_idx[static_cast<std::size_t>(j)];
                x[k] += alpha * (z[j] - x[k]);
            }
            std::fill(blocked.begin(), blocked.end(), false);
            for (Eigen::Index j = 0; j < nf; ++j) {
                const Eigen::Index k = free_idx[static_cast<std::size_t>(j)];
                const auto ku = static_cast<std::size_t>(k);
                const double slack = 1e-14 * std::max(hi[k] - lo[k], 1.0);
                if (z[j] < lo[k] && (k == limiting || x[k] <= lo[k] + slack)) {
                    x[k] = lo[k];
                    state[ku] = State::lower;
                } else if (z[j] > hi[k] && (k == limiting || x[k] >= hi[k] - slack)) {
                    x[k] = hi[k];
                    state[ku] = State::upper;
                } else {
                    x[k] = std::clamp(x[k], lo[k], hi[k]);
                }
            }
        }
    }

    // Exact feasibility regardless of rounding in the sub-solves.
    for (Eigen::Index k = 0; k < n; ++k) x[k] = std::clamp(x[k], lo[k], hi[k]);

    // Status is reported by position: a free variable that landed exactly on a
    // bound still has a ~0 gradient, so its sign condition holds either way.
    auto solution = certify(problem, x, tol);
    solution.iterations = iterations;
    return solution;
}

} // namespace pansharp
