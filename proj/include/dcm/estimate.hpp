#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dcm/bfgs.hpp"
#include "dcm/model.hpp"

namespace dcm {

struct EstimateOptions {
    int max_iters = 500;
    double grad_tol = 1e-6;
    std::optional<std::vector<double>> start_override;
    double hessian_step = 1e-4;
};

struct EstimationResult {
    ParameterVector estimates;
    std::optional<std::vector<double>> std_errors;  // absent when the Hessian is not negative definite
    std::optional<std::vector<double>> t_ratios;
    double loglik = 0;
    double null_loglik = 0;
    int iterations = 0;
    bool converged = false;
    StopReason reason = StopReason::max_iterations;
    bool hessian_pd = false;
    double grad_inf_norm = 0;
    std::size_t n_obs = 0;
    std::vector<IterationRecord> trace;

    std::size_t k() const { return estimates.size(); }
    std::optional<double> std_error(const std::string& name) const;
    std::optional<double> t_ratio(const std::string& name) const;
    std::optional<double> estimate(const std::string& name) const;

    bool operator==(const EstimationResult&) const;
};

/// Maximizes the log-likelihood from the declared (or overridden) start values.
EstimationResult estimate(const BoundModel& model, const EstimateOptions& options = {});

/// Central-difference Hessian of the log-likelihood built from the analytic
/// gradient with step h_i = rel_step * max(1, |theta_i|), symmetrized.
Eigen::MatrixXd numerical_hessian(const BoundModel& model, const std::vector<double>& theta, double rel_step = 1e-4);

/// True iff -H is positive definite after unit-diagonal rescaling.
bool negative_definite(const Eigen::MatrixXd& H);

nlohmann::json to_json(const EstimationResult& r);
EstimationResult estimation_from_json(const nlohmann::json& j);

}  // namespace dcm
