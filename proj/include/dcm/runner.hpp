#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dcm/estimate.hpp"
#include "dcm/llmgate.hpp"
#include "dcm/metrics.hpp"
#include "dcm/validate.hpp"

namespace dcm {

struct ReproductionTolerance {
    double absolute = 0.5;
    double relative = 5e-4;
};

enum class Verdict { reproduced, not_reproduced };
const char* to_string(Verdict v);

struct ReproductionVerdict {
    double claimed_ll = 0;
    double reestimated_ll = 0;
    double delta = 0;  // claimed - reestimated
    Verdict verdict = Verdict::not_reproduced;
};

/// reproduced iff |claimed - reestimated| <= max(absolute, relative * |reestimated|).
ReproductionVerdict crosscheck(double claimed_ll, double reestimated_ll, const ReproductionTolerance& tol = {});
ReproductionVerdict crosscheck(const Claim& claimed, const EstimationResult& estimation,
                               const ReproductionTolerance& tol = {});

struct SpecRecord {
    std::string provider;
    std::string model;
    std::string spec_name;
    std::string spec;  // canonical DSL text
    std::optional<SpecStats> stats;
    std::optional<EstimationResult> estimation;
    std::optional<FitStats> fit;
    std::optional<VotEstimate> vot;
    ValidationReport validation;
    std::optional<Claim> claimed;
    std::optional<ReproductionVerdict> reproduction;
    std::vector<std::string> diagnostics;

    std::string llm() const { return provider + "/" + model; }
};

struct ProviderRun {
    std::string provider;
    std::string model;
    std::string transcript_sha256;  // empty when no transcript was obtained
    std::vector<std::string> diagnostics;
    std::vector<Claim> orphaned_claims;

    std::string llm() const { return provider + "/" + model; }
};

struct ExperimentResult {
    ExperimentConfig config;
    std::vector<ProviderRun> providers;
    std::vector<SpecRecord> records;  // ordered by (provider, model, spec_name)
};

struct RunOptions {
    Mode mode = Mode::replay;
    std::filesystem::path fixtures = "fixtures";
    PromptOptions prompt;
    EstimateOptions estimate;
    ReproductionTolerance tolerance;
    unsigned workers = 1;  // concurrent spec estimations
};

/// Binds, estimates, measures and validates one spec. Never throws: failures
/// are recorded as diagnostics with an excluded_nonconvergence label.
SpecRecord evaluate_spec(const std::string& provider, const std::string& model, const UtilitySpec& spec,
                         const Dataset& data, const std::optional<Claim>& claim, const RunOptions& options);

/// Throws only when no provider produced a transcript.
ExperimentResult run_experiment(const ExperimentConfig& config, const std::vector<ProviderConfig>& providers,
                                const Dataset& data, const RunOptions& options);

nlohmann::json to_json(const SpecRecord& r);
SpecRecord record_from_json(const nlohmann::json& j);

/// Writes <out>/exp<N>/<provider>.<model>.json per provider plus manifest.json.
void persist(const ExperimentResult& result, const Dataset& data, const RunOptions& options,
             const std::filesystem::path& out_root);

/// Reads every exp*/ directory under a runs root, ordered by experiment id.
std::vector<ExperimentResult> load_runs(const std::filesystem::path& runs_root);
ExperimentResult load_experiment(const std::filesystem::path& exp_dir);

std::string result_file_name(const std::string& provider, const std::string& model);

}  // namespace dcm
