#pragma once

#include <functional>
#include <random>
#include <string>
#include <vector>

#include "dcm/dataset.hpp"
#include "dcm/model.hpp"
#include "dcm/runner.hpp"
#include "dcm/spec.hpp"

namespace testing {

std::string source_path(const std::string& rel);

const dcm::Dataset& synth_data();
dcm::UtilitySpec load_spec(const std::string& rel);

/// Dictionary with attribute columns x_<alt>, covariate z and the usual
/// availability/choice columns for the given alternatives.
dcm::DataDictionary simple_dictionary(const std::vector<std::string>& alts);

/// Parses a CSV against simple_dictionary(alts).
dcm::Dataset simple_dataset(const std::vector<std::string>& alts, const std::string& csv);

/// A random spec that the parser can produce; all names are valid.
dcm::UtilitySpec random_spec(std::mt19937_64& rng);

/// Random dataset for gradient checks: attributes positive and away from zero.
dcm::Dataset random_positive_dataset(std::mt19937_64& rng, std::size_t rows);

/// Max over free parameters of |analytic - central FD| / max(1, |FD|), with
/// step 1e-5 * max(0.01, |theta_i|).
double max_gradient_rel_error(const dcm::BoundModel& model, const std::vector<double>& theta);

struct NodeCase {
    std::string node;
    std::string source;  // spec over random_positive_dataset
};

/// One spec per expression node type, each using the node with a parameter
/// inside its argument where the node allows it.
const std::vector<NodeCase>& node_type_cases();

/// Worst gradient error of a case over `points` random parameter draws.
double node_case_worst_error(const NodeCase& c, std::mt19937_64& rng, int points);

/// Golden-section maximization of f on [lo, hi].
double golden_section_max(const std::function<double(double)>& f, double lo, double hi, double tol = 1e-12);

/// Copy of a dataset with every column whose name starts with `prefix` multiplied by `factor`.
dcm::Dataset scale_columns(const dcm::Dataset& d, const std::string& prefix, double factor);

struct OneDCheck {
    double bfgs = 0;
    double golden = 0;
    bool converged = false;
};
/// 2-alternative, 1-parameter logit on simulated data: BFGS vs golden section.
OneDCheck one_parameter_check();

struct ShareCheck {
    double max_gap = 0;  // max |mean fitted probability - sample share|
    bool converged = false;
};
/// ASC-only model on a full-availability synthetic sample.
ShareCheck asc_share_check();

struct ScalingCheck {
    double loglik_change = 0;
    double beta_cost_rel_error = 0;  // |100 * b_cost(scaled) - b_cost| / |b_cost|
    bool converged = false;
};
/// Best spec on the mode-choice data with cost columns multiplied by 100.
ScalingCheck cost_scaling_check();

/// Every provider/model with a stored transcript for `experiment` under fixtures/.
std::vector<dcm::ProviderConfig> fixture_providers(int experiment, const std::string& root = "fixtures");

/// Replay of one experiment over the stored fixtures on the synthetic data (cached).
const dcm::ExperimentResult& replayed(int experiment);

}  // namespace testing
