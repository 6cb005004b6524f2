#include "dcm/estimate.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "dcm/error.hpp"
#include "dcm/mnl.hpp"

namespace dcm {

namespace {

std::optional<std::size_t> position(const ParameterVector& p, const std::string& name) {
    for (std::size_t i = 0; i < p.names.size(); ++i)
        if (p.names[i] == name) return i;
    return std::nullopt;
}

// Non-finite numbers have no JSON literal; they are written as strings.
nlohmann::json number(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

double read_number(const nlohmann::json& j) {
    if (j.is_number()) return j.get<double>();
    const auto s = j.get<std::string>();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw Error("bad number in results document: " + s);
}

StopReason reason_from_string(const std::string& s) {
    for (auto r : {StopReason::gradient_tolerance, StopReason::max_iterations, StopReason::line_search_failure,
                   StopReason::non_finite})
        if (s == to_string(r)) return r;
    throw Error("unknown convergence reason: " + s);
}

bool same(double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); }

bool same(const std::optional<std::vector<double>>& a, const std::optional<std::vector<double>>& b) {
    if (a.has_value() != b.has_value()) return false;
    if (!a) return true;
    if (a->size() != b->size()) return false;
    for (std::size_t i = 0; i < a->size(); ++i)
        if (!same((*a)[i], (*b)[i])) return false;
    return true;
}

}  // namespace

std::optional<double> EstimationResult::estimate(const std::string& name) const {
    const auto i = position(estimates, name);
    return i ? std::optional(estimates.values[*i]) : std::nullopt;
}
std::optional<double> EstimationResult::std_error(const std::string& name) const {
    const auto i = position(estimates, name);
    return i && std_errors ? std::optional((*std_errors)[*i]) : std::nullopt;
}
std::optional<double> EstimationResult::t_ratio(const std::string& name) const {
    const auto i = position(estimates, name);
    return i && t_ratios ? std::optional((*t_ratios)[*i]) : std::nullopt;
}

bool EstimationResult::operator==(const EstimationResult& o) const {
    if (estimates.names != o.estimates.names || estimates.size() != o.estimates.size()) return false;
    for (std::size_t i = 0; i < estimates.size(); ++i)
        if (!same(estimates[i], o.estimates[i])) return false;
    return same(std_errors, o.std_errors) && same(t_ratios, o.t_ratios) && same(loglik, o.loglik) &&
           same(null_loglik, o.null_loglik) && iterations == o.iterations && converged == o.converged &&
           reason == o.reason && hessian_pd == o.hessian_pd && same(grad_inf_norm, o.grad_inf_norm) &&
           n_obs == o.n_obs && trace.size() == o.trace.size();
}

Eigen::MatrixXd numerical_hessian(const BoundModel& model, const std::vector<double>& theta, double rel_step) {
    const std::size_t n = theta.size();
    Eigen::MatrixXd H(n, n);
    std::vector<double> tp = theta, gp, gm;
    for (std::size_t i = 0; i < n; ++i) {
        const double h = rel_step * std::max(1.0, std::abs(theta[i]));
        tp[i] = theta[i] + h;
        loglik_and_gradient(model, tp, gp);
        tp[i] = theta[i] - h;
        loglik_and_gradient(model, tp, gm);
        tp[i] = theta[i];
        for (std::size_t k = 0; k < n; ++k) H(k, i) = (gp[k] - gm[k]) / (2 * h);
    }
    return (H + H.transpose()) / 2;
}

bool negative_definite(const Eigen::MatrixXd& H) {
    if (H.size() == 0) return true;
    if (!H.allFinite()) return false;
    const Eigen::VectorXd d = H.diagonal().cwiseAbs();
    if ((d.array() <= 0).any()) return false;
    const Eigen::VectorXd s = d.cwiseSqrt().cwiseInverse();
    const Eigen::MatrixXd A = -(s.asDiagonal() * H * s.asDiagonal());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
    return es.info() == Eigen::Success && es.eigenvalues().minCoeff() > 1e-8;
}

EstimationResult estimate(const BoundModel& model, const EstimateOptions& options) {
    const std::size_t n = model.n_free();
    const auto& data = model.data();
    EstimationResult r;
    r.estimates = model.start_values();
    if (options.start_override) {
        if (options.start_override->size() != n) throw Error("start override has the wrong length");
        r.estimates.values = *options.start_override;
    }
    r.n_obs = data.n_obs();
    r.null_loglik = null_loglik(data);

    const double n_obs = static_cast<double>(std::max<std::size_t>(1, data.n_obs()));
    const auto tolerance = [&](double ll) { return options.grad_tol * std::max(1.0, std::abs(ll) / n_obs); };

    // Minimize -LL; NonFiniteUtility marks the point as unusable.
    const Objective objective = [&](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
        std::vector<double> th(x.data(), x.data() + x.size()), g;
        try {
            const double ll = loglik_and_gradient(model, th, g);
            for (std::size_t i = 0; i < n; ++i) grad[i] = -g[i];
            return -ll;
        } catch (const NonFiniteUtility&) {
            return std::numeric_limits<double>::infinity();
        }
    };
    const ConvergenceTest done = [&](double f, const Eigen::VectorXd& g) {
        return g.size() == 0 || g.lpNorm<Eigen::Infinity>() <= tolerance(f);
    };

    BfgsOptions bo;
    bo.max_iters = options.max_iters;
    const Eigen::VectorXd x0 = Eigen::Map<const Eigen::VectorXd>(r.estimates.values.data(), n);
    const BfgsResult b = bfgs_minimize(objective, x0, done, bo);

    r.estimates.values.assign(b.x.data(), b.x.data() + n);
    r.loglik = -b.f;
    r.iterations = b.iterations;
    r.reason = b.reason;
    r.grad_inf_norm = n ? b.g.lpNorm<Eigen::Infinity>() : 0.0;
    r.trace = b.trace;
    for (auto& t : r.trace) t.f = -t.f;
    if (b.reason == StopReason::non_finite) return r;

    Eigen::MatrixXd H;
    try {
        H = numerical_hessian(model, r.estimates.values, options.hessian_step);
    } catch (const NonFiniteUtility&) {
        return r;
    }
    r.hessian_pd = negative_definite(H);
    if (r.hessian_pd) {
        const Eigen::MatrixXd cov = (-H).inverse();
        std::vector<double> se(n), t(n);
        for (std::size_t i = 0; i < n; ++i) {
            se[i] = std::sqrt(cov(i, i));
            t[i] = se[i] > 0 ? r.estimates[i] / se[i] : std::numeric_limits<double>::quiet_NaN();
        }
        r.std_errors = std::move(se);
        r.t_ratios = std::move(t);
    }
    r.converged = r.reason == StopReason::gradient_tolerance && r.hessian_pd;
    return r;
}

nlohmann::json to_json(const EstimationResult& r) {
    nlohmann::json params = nlohmann::json::array();
    for (std::size_t i = 0; i < r.estimates.size(); ++i) {
        nlohmann::json p = {{"name", r.estimates.names[i]}, {"estimate", number(r.estimates[i])}};
        p["std_error"] = r.std_errors ? number((*r.std_errors)[i]) : nlohmann::json(nullptr);
        p["t_ratio"] = r.t_ratios ? number((*r.t_ratios)[i]) : nlohmann::json(nullptr);
        params.push_back(std::move(p));
    }
    nlohmann::json trace = nlohmann::json::array();
    for (const auto& t : r.trace)
        trace.push_back({{"iteration", t.iteration},
                         {"loglik", number(t.f)},
                         {"grad_inf_norm", number(t.grad_inf_norm)},
                         {"step", number(t.step)}});
    return {{"schema", "dcm.estimation/1"},
            {"parameters", std::move(params)},
            {"loglik", number(r.loglik)},
            {"null_loglik", number(r.null_loglik)},
            {"n_obs", r.n_obs},
            {"k", r.k()},
            {"iterations", r.iterations},
            {"converged", r.converged},
            {"convergence_reason", to_string(r.reason)},
            {"hessian_pd", r.hessian_pd},
            {"grad_inf_norm", number(r.grad_inf_norm)},
            {"trace", std::move(trace)}};
}

EstimationResult estimation_from_json(const nlohmann::json& j) {
    if (j.value("schema", "") != "dcm.estimation/1") throw Error("not an estimation results document");
    EstimationResult r;
    bool has_se = true, has_t = true;
    for (const auto& p : j.at("parameters")) {
        has_se = has_se && !p.at("std_error").is_null();
        has_t = has_t && !p.at("t_ratio").is_null();
    }
    std::vector<double> se, t;
    for (const auto& p : j.at("parameters")) {
        r.estimates.names.push_back(p.at("name").get<std::string>());
        r.estimates.values.push_back(read_number(p.at("estimate")));
        if (has_se) se.push_back(read_number(p.at("std_error")));
        if (has_t) t.push_back(read_number(p.at("t_ratio")));
    }
    if (has_se) r.std_errors = std::move(se);
    if (has_t) r.t_ratios = std::move(t);
    r.loglik = read_number(j.at("loglik"));
    r.null_loglik = read_number(j.at("null_loglik"));
    r.n_obs = j.at("n_obs").get<std::size_t>();
    r.iterations = j.at("iterations").get<int>();
    r.converged = j.at("converged").get<bool>();
    r.reason = reason_from_string(j.at("convergence_reason").get<std::string>());
    r.hessian_pd = j.at("hessian_pd").get<bool>();
    r.grad_inf_norm = read_number(j.at("grad_inf_norm"));
    for (const auto& t : j.at("trace"))
        r.trace.push_back({t.at("iteration").get<int>(), read_number(t.at("loglik")),
                           read_number(t.at("grad_inf_norm")), read_number(t.at("step"))});
    return r;
}

}  // namespace dcm
