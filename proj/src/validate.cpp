#include "dcm/validate.hpp"

#include <cmath>
#include <set>

#include "dcm/error.hpp"
#include "dcm/metrics.hpp"

namespace dcm {

const char* to_string(Exclusion e) {
    switch (e) {
        case Exclusion::included: return "included";
        case Exclusion::excluded_no_asc: return "excluded_no_asc";
        case Exclusion::excluded_nonconvergence: return "excluded_nonconvergence";
        case Exclusion::excluded_positive_sign: return "excluded_positive_sign";
    }
    return "?";
}

Exclusion exclusion_from_string(const std::string& s) {
    for (auto e : {Exclusion::included, Exclusion::excluded_no_asc, Exclusion::excluded_nonconvergence,
                   Exclusion::excluded_positive_sign})
        if (s == to_string(e)) return e;
    throw Error("unknown exclusion label: " + s);
}

ValidationReport check_model(const EstimationResult& result, const UtilitySpec& spec, const DataDictionary& dictionary) {
    ValidationReport r;
    r.converged = result.converged;

    const auto used = used_parameters(spec);
    const std::set<std::string> used_set(used.begin(), used.end());
    std::set<std::string> asc_alts;
    for (const auto& p : spec.parameters) {
        if (p.role != ParamRole::asc || !p.is_free() || !used_set.count(p.name)) continue;
        r.has_asc = true;
        for (const auto& [alt, e] : spec.utilities) {
            std::set<std::string> ps;
            collect_parameters(e, ps);
            if (ps.count(p.name)) asc_alts.insert(alt);
        }
    }
    if (r.has_asc && asc_alts.size() == spec.alternatives.size()) r.notes.push_back("unidentified_asc");

    std::set<std::string> seen;
    std::vector<MainEffect> effects;
    try {
        effects = main_effects(spec, dictionary);
    } catch (const SpecError& e) {
        r.notes.push_back(std::string("main effects unavailable: ") + e.what());
    }
    for (const auto& e : effects) {
        if (!seen.insert(e.parameter).second) continue;
        const auto beta = parameter_value(result, spec, e.parameter);
        if (!beta) continue;
        if (e.multiplier * *beta > 0) r.sign_violations.push_back({e.parameter, *beta});
        if (result.estimate(e.parameter)) {
            const auto t = result.t_ratio(e.parameter);
            if (!t || !(std::abs(*t) >= 1.96)) r.insignificant_core.push_back(e.parameter);
        }
    }

    if (!r.converged) {
        r.exclusion = Exclusion::excluded_nonconvergence;
        r.notes.push_back(std::string("convergence_reason=") + to_string(result.reason) +
                          (result.hessian_pd ? "" : ", hessian not negative definite"));
    } else if (!r.sign_violations.empty()) {
        r.exclusion = Exclusion::excluded_positive_sign;
    } else if (!r.has_asc) {
        r.exclusion = Exclusion::excluded_no_asc;
    }
    return r;
}

BatchPartition batch_filter(const std::vector<ValidatedSpec>& batch) {
    BatchPartition out;
    for (const auto& v : batch) (v.report.exclusion == Exclusion::included ? out.included : out.excluded).push_back(v);
    return out;
}

nlohmann::json to_json(const ValidationReport& r) {
    nlohmann::json sv = nlohmann::json::array();
    for (const auto& s : r.sign_violations) sv.push_back({{"parameter", s.parameter}, {"estimate", s.estimate}});
    return {{"has_asc", r.has_asc},
            {"converged", r.converged},
            {"sign_violations", std::move(sv)},
            {"insignificant_core", r.insignificant_core},
            {"exclusion", to_string(r.exclusion)},
            {"notes", r.notes}};
}

ValidationReport validation_from_json(const nlohmann::json& j) {
    ValidationReport r;
    r.has_asc = j.at("has_asc").get<bool>();
    r.converged = j.at("converged").get<bool>();
    for (const auto& s : j.at("sign_violations"))
        r.sign_violations.push_back({s.at("parameter").get<std::string>(), s.at("estimate").get<double>()});
    r.insignificant_core = j.at("insignificant_core").get<std::vector<std::string>>();
    r.exclusion = exclusion_from_string(j.at("exclusion").get<std::string>());
    r.notes = j.at("notes").get<std::vector<std::string>>();
    return r;
}

}  // namespace dcm
