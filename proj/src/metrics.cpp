#include "dcm/metrics.hpp"

#include <cmath>
#include <set>

#include "dcm/error.hpp"

namespace dcm {

FitStats information_criteria(double loglik, std::size_t k, std::size_t n) {
    const double kk = static_cast<double>(k);
    return {loglik, k, n, 2 * kk - 2 * loglik, kk * std::log(static_cast<double>(n)) - 2 * loglik};
}

double rho_squared(double loglik, double null_loglik) { return 1 - loglik / null_loglik; }

std::optional<double> parameter_value(const EstimationResult& result, const UtilitySpec& spec, const std::string& name) {
    if (auto v = result.estimate(name)) return v;
    if (const auto* p = spec.find_parameter(name); p && p->fixed) return *p->fixed;
    return std::nullopt;
}

VotEstimate value_of_time(const EstimationResult& result, const UtilitySpec& spec, const DataDictionary& dictionary) {
    struct Sums {
        double time = 0, cost = 0;
        bool has_time = false, has_cost = false;
    };
    std::map<std::string, Sums> by_alt;
    std::set<std::string> used;
    bool skipped_nonlinear = false;
    for (const auto& e : main_effects(spec, dictionary)) {
        if (!e.linear) {
            skipped_nonlinear = true;
            continue;
        }
        const auto beta = parameter_value(result, spec, e.parameter);
        if (!beta) throw MissingCoefficient("no value for parameter '" + e.parameter + "'");
        auto& s = by_alt[e.alternative];
        if (e.quantity == Quantity::time) {
            s.time += e.multiplier * *beta;
            s.has_time = true;
        } else {
            s.cost += e.multiplier * *beta;
            s.has_cost = true;
        }
        used.insert(e.parameter);
    }

    VotEstimate v;
    double sum = 0;
    for (const auto& alt : spec.alternatives) {
        const auto it = by_alt.find(alt);
        if (it == by_alt.end() || !it->second.has_time || !it->second.has_cost) continue;
        const double r = it->second.time / it->second.cost;
        v.per_alternative[alt] = r;
        sum += r;
    }
    if (v.per_alternative.empty())
        throw MissingCoefficient("no alternative has both a linear time and a linear cost coefficient");
    v.value = sum / static_cast<double>(v.per_alternative.size());

    v.reliable = std::isfinite(v.value);
    std::vector<std::string> weak;
    for (const auto& name : used) {
        if (!result.estimate(name)) continue;  // fixed
        const auto t = result.t_ratio(name);
        if (!t || !(std::abs(*t) >= 1.96)) {
            v.reliable = false;
            weak.push_back(name);
        }
    }
    v.notes = "interactions excluded, covariates at 0";
    if (skipped_nonlinear) v.notes += "; nonlinear time/cost terms ignored";
    if (!weak.empty()) {
        v.notes += "; |t| < 1.96 or no standard error:";
        for (const auto& w : weak) v.notes += " " + w;
    }
    return v;
}

nlohmann::json to_json(const FitStats& f) {
    return {{"loglik", f.loglik}, {"k", f.k}, {"n", f.n}, {"aic", f.aic}, {"bic", f.bic}};
}

nlohmann::json to_json(const VotEstimate& v) {
    nlohmann::json per = nlohmann::json::object();
    for (const auto& [alt, r] : v.per_alternative) per[alt] = std::isfinite(r) ? nlohmann::json(r) : nlohmann::json(nullptr);
    return {{"value", std::isfinite(v.value) ? nlohmann::json(v.value) : nlohmann::json(nullptr)},
            {"per_alternative", std::move(per)},
            {"reliable", v.reliable},
            {"notes", v.notes}};
}

VotEstimate vot_from_json(const nlohmann::json& j) {
    VotEstimate v;
    const auto num = [](const nlohmann::json& x) { return x.is_null() ? std::nan("") : x.get<double>(); };
    v.value = num(j.at("value"));
    for (const auto& [alt, r] : j.at("per_alternative").items()) v.per_alternative[alt] = num(r);
    v.reliable = j.at("reliable").get<bool>();
    v.notes = j.at("notes").get<std::string>();
    return v;
}

}  // namespace dcm
