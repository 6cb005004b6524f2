#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dcm/model.hpp"

namespace dcm {

/// Choice probabilities for one row, aligned to data().alternatives().
/// Unavailable alternatives get exactly 0.
std::vector<double> probabilities(const BoundModel& model, std::span<const double> theta, std::size_t row);
inline std::vector<double> probabilities(const BoundModel& model, const ParameterVector& theta, std::size_t row) {
    return probabilities(model, theta.values, row);
}

/// Systematic utilities for one row; unavailable alternatives are left at 0.
std::vector<double> utilities(const BoundModel& model, std::span<const double> theta, std::size_t row);

double log_likelihood(const BoundModel& model, std::span<const double> theta);
inline double log_likelihood(const BoundModel& model, const ParameterVector& theta) {
    return log_likelihood(model, theta.values);
}

/// Exact gradient of the log-likelihood over the free parameters.
std::vector<double> gradient(const BoundModel& model, std::span<const double> theta);
inline std::vector<double> gradient(const BoundModel& model, const ParameterVector& theta) {
    return gradient(model, theta.values);
}

/// Log-likelihood and its gradient in one pass.
double loglik_and_gradient(const BoundModel& model, std::span<const double> theta, std::vector<double>& grad);

/// Sum over rows of -ln(number of available alternatives).
double null_loglik(const Dataset& data);

}  // namespace dcm
