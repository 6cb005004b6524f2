#include "dcm/bfgs.hpp"

#include <algorithm>
#include <cmath>

namespace dcm {

const char* to_string(StopReason r) {
    switch (r) {
        case StopReason::gradient_tolerance: return "gradient_tolerance";
        case StopReason::max_iterations: return "max_iterations";
        case StopReason::line_search_failure: return "line_search_failure";
        case StopReason::non_finite: return "non_finite";
    }
    return "?";
}

namespace {

struct Step {
    bool ok = false;
    double alpha = 0;
    Eigen::VectorXd x, g;
    double f = 0;
};

Step backtrack(const Objective& fn, const Eigen::VectorXd& x, double f, const Eigen::VectorXd& g,
               const Eigen::VectorXd& p, double alpha, const BfgsOptions& opt) {
    const double slope = g.dot(p);
    const double flat = 1e-12 * std::max(1.0, std::abs(f));
    Step s;
    s.g.resize(x.size());
    for (int k = 0; k < opt.max_backtracks; ++k, alpha *= opt.shrink) {
        s.x = x + alpha * p;
        s.f = fn(s.x, s.g);
        if (!std::isfinite(s.f) || !s.g.allFinite()) continue;
        const bool armijo = s.f <= f + opt.armijo_c * alpha * slope;
        // Near the optimum f is flat to rounding; accept when the directional
        // derivative has dropped enough even if the decrease is unmeasurable.
        const bool approx = s.f <= f + flat && s.g.dot(p) <= (1 - 2 * opt.armijo_c) * std::abs(slope);
        if (armijo || approx) {
            s.ok = true;
            s.alpha = alpha;
            return s;
        }
    }
    return s;
}

}  // namespace

BfgsResult bfgs_minimize(const Objective& fn, Eigen::VectorXd x, const ConvergenceTest& done, const BfgsOptions& opt) {
    const Eigen::Index n = x.size();
    BfgsResult r;
    Eigen::VectorXd g(n);
    double f = fn(x, g);
    r.trace.push_back({0, f, g.size() ? g.lpNorm<Eigen::Infinity>() : 0.0, 0.0});
    auto finish = [&](StopReason why, int it) {
        r.x = x;
        r.f = f;
        r.g = g;
        r.iterations = it;
        r.reason = why;
        return r;
    };
    if (!std::isfinite(f) || !g.allFinite()) return finish(StopReason::non_finite, 0);

    Eigen::MatrixXd H = Eigen::MatrixXd::Identity(n, n);
    bool scaled = false;
    for (int it = 0; it < opt.max_iters; ++it) {
        if (done(f, g)) return finish(StopReason::gradient_tolerance, it);

        Eigen::VectorXd p = -H * g;
        if (g.dot(p) >= 0) {
            H.setIdentity();
            scaled = false;
            p = -g;
        }
        double alpha0 = scaled ? 1.0 : std::min(1.0, 1.0 / g.lpNorm<Eigen::Infinity>());
        Step s = backtrack(fn, x, f, g, p, alpha0, opt);
        if (!s.ok && scaled) {
            H.setIdentity();
            scaled = false;
            p = -g;
            s = backtrack(fn, x, f, g, p, std::min(1.0, 1.0 / g.lpNorm<Eigen::Infinity>()), opt);
        }
        if (!s.ok) return finish(StopReason::line_search_failure, it);

        const Eigen::VectorXd sv = s.x - x;
        const Eigen::VectorXd y = s.g - g;
        const double sy = sv.dot(y);
        if (sy > 1e-10 * sv.norm() * y.norm()) {
            if (!scaled) {
                H = Eigen::MatrixXd::Identity(n, n) * (sy / y.dot(y));
                scaled = true;
            }
            const double rho = 1.0 / sy;
            const Eigen::VectorXd Hy = H * y;
            // H+ = (I - rho s y')H(I - rho y s') + rho s s'
            H += rho * ((1 + rho * y.dot(Hy)) * sv * sv.transpose() - Hy * sv.transpose() - sv * Hy.transpose());
        }
        x = s.x;
        f = s.f;
        g = s.g;
        r.trace.push_back({it + 1, f, g.lpNorm<Eigen::Infinity>(), s.alpha});
    }
    return finish(done(f, g) ? StopReason::gradient_tolerance : StopReason::max_iterations, opt.max_iters);
}

}  // namespace dcm
