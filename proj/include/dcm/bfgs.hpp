#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace dcm {

enum class StopReason { gradient_tolerance, max_iterations, line_search_failure, non_finite };
const char* to_string(StopReason r);

struct BfgsOptions {
    int max_iters = 500;
    double armijo_c = 1e-4;
    double shrink = 0.5;
    int max_backtracks = 60;
};

struct IterationRecord {
    int iteration = 0;
    double f = 0;
    double grad_inf_norm = 0;
    double step = 0;
};

struct BfgsResult {
    Eigen::VectorXd x;
    double f = 0;
    Eigen::VectorXd g;
    int iterations = 0;
    StopReason reason = StopReason::max_iterations;
    std::vector<IterationRecord> trace;
};

/// Objective returning f(x) and writing its gradient. A non-finite return
/// marks x as outside the usable region.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

/// Stopping test on (f, gradient); called before every iteration.
using ConvergenceTest = std::function<bool(double f, const Eigen::VectorXd& grad)>;

/// Minimizes f by BFGS on the inverse Hessian with Armijo backtracking.
BfgsResult bfgs_minimize(const Objective& f, Eigen::VectorXd x0, const ConvergenceTest& done,
                         const BfgsOptions& options = {});

}  // namespace dcm
