#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "dcm/estimate.hpp"
#include "dcm/spec.hpp"

namespace dcm {

enum class Exclusion { included, excluded_no_asc, excluded_nonconvergence, excluded_positive_sign };
const char* to_string(Exclusion e);
Exclusion exclusion_from_string(const std::string& s);

struct SignViolation {
    std::string parameter;
    double estimate = 0;
    bool operator==(const SignViolation&) const = default;
};

struct ValidationReport {
    bool has_asc = false;
    bool converged = false;
    std::vector<SignViolation> sign_violations;
    std::vector<std::string> insignificant_core;
    Exclusion exclusion = Exclusion::included;
    std::vector<std::string> notes;

    bool operator==(const ValidationReport&) const = default;
};

/// Applies the inclusion rules. Exactly one label is reported, with
/// precedence nonconvergence > positive sign > no ASC; every flag is kept.
ValidationReport check_model(const EstimationResult& result, const UtilitySpec& spec, const DataDictionary& dictionary);

struct ValidatedSpec {
    UtilitySpec spec;
    ValidationReport report;
};

struct BatchPartition {
    std::vector<ValidatedSpec> included;
    std::vector<ValidatedSpec> excluded;
};

/// Stable partition on the exclusion label.
BatchPartition batch_filter(const std::vector<ValidatedSpec>& batch);

nlohmann::json to_json(const ValidationReport& r);
ValidationReport validation_from_json(const nlohmann::json& j);

}  // namespace dcm
