#pragma once

#include <cstddef>
#include <map>
#include <string>

#include <json.hpp>

#include "dcm/estimate.hpp"
#include "dcm/spec.hpp"

namespace dcm {

struct FitStats {
    double loglik = 0;
    std::size_t k = 0;
    std::size_t n = 0;
    double aic = 0;
    double bic = 0;
};

FitStats information_criteria(double loglik, std::size_t k, std::size_t n);

double rho_squared(double loglik, double null_loglik);

struct VotEstimate {
    double value = 0;  // cost units per time unit
    std::map<std::string, double> per_alternative;
    bool reliable = false;
    std::string notes;
};

/// Mean over alternatives of beta_time / beta_cost, using linear main effects
/// only (covariates at zero). Throws MissingCoefficient if no alternative has
/// both a time and a cost coefficient.
VotEstimate value_of_time(const EstimationResult& result, const UtilitySpec& spec, const DataDictionary& dictionary);

/// Current value of a parameter: the estimate if free, the fixed value otherwise.
std::optional<double> parameter_value(const EstimationResult& result, const UtilitySpec& spec, const std::string& name);

nlohmann::json to_json(const FitStats& f);
nlohmann::json to_json(const VotEstimate& v);
VotEstimate vot_from_json(const nlohmann::json& j);

}  // namespace dcm
