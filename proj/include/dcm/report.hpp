#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dcm/runner.hpp"

namespace dcm {

enum class Metric { ll, aic, bic, vot };
Metric metric_from_string(const std::string& s);
const char* to_string(Metric m);

/// Metric value recomputed from a record's estimation; nullopt when absent.
std::optional<double> metric_value(const SpecRecord& r, Metric m);

/// Markdown table of one experiment: rows are specs, columns LL, AIC, BIC,
/// VoT. Excluded rows carry their marker; the best included LL and AIC are bold.
std::string summary_table(const ExperimentResult& result);

struct BestOf {
    Metric metric = Metric::ll;
    std::vector<int> experiments;
    std::vector<std::string> llms;
    std::vector<std::vector<std::optional<double>>> cells;  // [llm][experiment]
    std::vector<std::optional<int>> best_experiment;        // per llm
    std::vector<std::optional<double>> best_value;          // per llm
    std::vector<std::optional<std::string>> best_llm;       // per experiment
    std::vector<std::optional<double>> best_llm_value;      // per experiment

    std::string to_markdown() const;
};

/// Best included value per LLM and experiment with both marginals. Ties go
/// to the lower experiment id, and across LLMs to the first in name order.
BestOf best_of(const std::vector<ExperimentResult>& results, Metric metric);

struct LlmProfile {
    std::string llm;
    double avg_n_specs = 0;
    double pct_converged = 0;
    double avg_n_vars = 0;
    double avg_n_params = 0;
    double pct_generic = 0;
    double pct_altspecific = 0;
    double pct_asc_included = 0;
    double avg_socioeconomics = 0;
    double avg_transformations = 0;
    double avg_interactions = 0;
};

/// Structural averages over every spec an LLM produced, converged or not.
std::vector<LlmProfile> llm_profile(const std::vector<ExperimentResult>& results);
std::string profile_table(const std::vector<LlmProfile>& profiles);

/// Long CSV (model, experiment, spec, value[, reliable]) over converged specs.
std::string distribution_export(const std::vector<ExperimentResult>& results, Metric metric);

}  // namespace dcm
