#include "dcm/report.hpp"

#include <cmath>
#include <map>
#include <set>

#include "dcm/text.hpp"

namespace dcm {

Metric metric_from_string(const std::string& s) {
    if (s == "ll") return Metric::ll;
    if (s == "aic") return Metric::aic;
    if (s == "bic") return Metric::bic;
    if (s == "vot") return Metric::vot;
    throw Error("unknown metric '" + s + "' (expected ll, aic, bic or vot)");
}

const char* to_string(Metric m) {
    switch (m) {
        case Metric::ll: return "ll";
        case Metric::aic: return "aic";
        case Metric::bic: return "bic";
        case Metric::vot: return "vot";
    }
    return "?";
}

namespace {

const char* heading(Metric m) {
    switch (m) {
        case Metric::ll: return "LL";
        case Metric::aic: return "AIC";
        case Metric::bic: return "BIC";
        case Metric::vot: return "VoT";
    }
    return "?";
}

bool higher_is_better(Metric m) { return m == Metric::ll; }

bool better(Metric m, double a, double b) { return higher_is_better(m) ? a > b : a < b; }

std::string fmt_metric(Metric m, std::optional<double> v) {
    if (!v || !std::isfinite(*v)) return "--";
    return text::fixed(*v, m == Metric::vot ? 3 : 2);
}

const char* marker(Exclusion e) {
    switch (e) {
        case Exclusion::excluded_no_asc: return "*";
        case Exclusion::excluded_nonconvergence: return "†";
        case Exclusion::excluded_positive_sign: return "‡";
        default: return "";
    }
}

}  // namespace

std::optional<double> metric_value(const SpecRecord& r, Metric m) {
    if (m == Metric::vot) return r.vot ? std::optional(r.vot->value) : std::nullopt;
    if (!r.estimation || !std::isfinite(r.estimation->loglik)) return std::nullopt;
    const auto f = information_criteria(r.estimation->loglik, r.estimation->k(), r.estimation->n_obs);
    return m == Metric::ll ? f.loglik : m == Metric::aic ? f.aic : f.bic;
}

std::string summary_table(const ExperimentResult& result) {
    std::string out = "# Experiment " + std::to_string(result.config.id) + " (" + result.config.label() + ")\n\n";
    std::optional<double> best_ll, best_aic;
    for (const auto& r : result.records) {
        if (r.validation.exclusion != Exclusion::included) continue;
        const auto ll = metric_value(r, Metric::ll), aic = metric_value(r, Metric::aic);
        if (ll && (!best_ll || *ll > *best_ll)) best_ll = ll;
        if (aic && (!best_aic || *aic < *best_aic)) best_aic = aic;
    }
    out += "| Model | Spec | LL | AIC | BIC | VoT |\n| --- | --- | ---: | ---: | ---: | ---: |\n";
    bool any_unreliable = false;
    for (const auto& r : result.records) {
        const bool included = r.validation.exclusion == Exclusion::included;
        auto cell = [&](Metric m, const std::optional<double>& best) {
            const auto v = metric_value(r, m);
            auto s = fmt_metric(m, v);
            if (included && v && best && fmt_metric(m, v) == fmt_metric(m, best)) s = "**" + s + "**";
            return s;
        };
        std::string vot = fmt_metric(Metric::vot, metric_value(r, Metric::vot));
        if (r.vot && !r.vot->reliable) {
            vot += "§";
            any_unreliable = true;
        }
        out += "| " + r.llm() + " | " + r.spec_name + marker(r.validation.exclusion) + " | " + cell(Metric::ll, best_ll) +
               " | " + cell(Metric::aic, best_aic) + " | " + fmt_metric(Metric::bic, metric_value(r, Metric::bic)) +
               " | " + vot + " |\n";
    }
    out += "\n* no ASCs included; † did not converge; ‡ positive time or cost coefficient.";
    if (any_unreliable) out += " § VoT unreliable (|t| < 1.96).";
    out += "\nBold: best LL and AIC among included specifications.\n";
    if (!best_ll) out += "\n> Warning: no specification passed the inclusion rules.\n";
    return out;
}

BestOf best_of(const std::vector<ExperimentResult>& results, Metric metric) {
    BestOf b;
    b.metric = metric;
    std::set<int> exps;
    std::set<std::string> llms;
    for (const auto& res : results) {
        exps.insert(res.config.id);
        for (const auto& p : res.providers) llms.insert(p.llm());
        for (const auto& r : res.records) llms.insert(r.llm());
    }
    b.experiments.assign(exps.begin(), exps.end());
    b.llms.assign(llms.begin(), llms.end());
    b.cells.assign(b.llms.size(), std::vector<std::optional<double>>(b.experiments.size()));

    const auto col = [&](int id) {
        return static_cast<std::size_t>(std::find(b.experiments.begin(), b.experiments.end(), id) - b.experiments.begin());
    };
    const auto row = [&](const std::string& l) {
        return static_cast<std::size_t>(std::find(b.llms.begin(), b.llms.end(), l) - b.llms.begin());
    };
    for (const auto& res : results)
        for (const auto& r : res.records) {
            if (r.validation.exclusion != Exclusion::included) continue;
            const auto v = metric_value(r, metric);
            if (!v || !std::isfinite(*v)) continue;
            auto& cell = b.cells[row(r.llm())][col(res.config.id)];
            if (!cell || better(metric, *v, *cell)) cell = v;
        }

    for (std::size_t i = 0; i < b.llms.size(); ++i) {
        std::optional<int> be;
        std::optional<double> bv;
        for (std::size_t e = 0; e < b.experiments.size(); ++e) {
            const auto& c = b.cells[i][e];
            if (c && (!bv || better(metric, *c, *bv))) {
                bv = c;
                be = b.experiments[e];
            }
        }
        b.best_experiment.push_back(be);
        b.best_value.push_back(bv);
    }
    for (std::size_t e = 0; e < b.experiments.size(); ++e) {
        std::optional<std::string> bl;
        std::optional<double> bv;
        for (std::size_t i = 0; i < b.llms.size(); ++i) {
            const auto& c = b.cells[i][e];
            if (c && (!bv || better(metric, *c, *bv))) {
                bv = c;
                bl = b.llms[i];
            }
        }
        b.best_llm.push_back(bl);
        b.best_llm_value.push_back(bv);
    }
    return b;
}

std::string BestOf::to_markdown() const {
    const std::string h = heading(metric);
    std::string out = "# Best " + h + " per LLM and experiment\n\n| LLM |";
    for (int e : experiments) out += " Exp. " + std::to_string(e) + " |";
    out += " Best Exp. | Best " + h + " |\n| --- |";
    for (std::size_t e = 0; e < experiments.size(); ++e) out += " ---: |";
    out += " --- | ---: |\n";
    for (std::size_t i = 0; i < llms.size(); ++i) {
        out += "| " + llms[i] + " |";
        for (const auto& c : cells[i]) out += " " + fmt_metric(metric, c) + " |";
        out += " " + (best_experiment[i] ? "Exp. " + std::to_string(*best_experiment[i]) : std::string("--")) + " | " +
               fmt_metric(metric, best_value[i]) + " |\n";
    }
    out += "| Best LLM |";
    for (const auto& l : best_llm) out += " " + l.value_or("--") + " |";
    out += " | |\n| Best " + h + " |";
    for (const auto& v : best_llm_value) out += " " + fmt_metric(metric, v) + " |";
    out += " | |\n\nIncluded specifications only. Ties go to the lower experiment id, then to the LLM listed first.\n";
    return out;
}

std::vector<LlmProfile> llm_profile(const std::vector<ExperimentResult>& results) {
    struct Acc {
        std::set<int> experiments;
        double specs = 0, converged = 0, with_stats = 0, vars = 0, params = 0, generic = 0, altspec = 0, asc = 0,
               socio = 0, transf = 0, inter = 0;
    };
    std::map<std::string, Acc> acc;
    for (const auto& res : results) {
        for (const auto& p : res.providers)
            if (!p.transcript_sha256.empty()) acc[p.llm()].experiments.insert(res.config.id);
        for (const auto& r : res.records) {
            auto& a = acc[r.llm()];
            a.experiments.insert(res.config.id);
            a.specs += 1;
            if (r.estimation && r.estimation->converged) a.converged += 1;
            if (!r.stats) continue;
            const auto& s = *r.stats;
            a.with_stats += 1;
            a.vars += s.n_vars;
            a.params += s.n_params;
            a.generic += s.n_generic;
            a.altspec += s.n_altspecific;
            a.asc += s.has_asc ? 1 : 0;
            a.socio += s.n_socioeconomic;
            a.transf += s.n_transformations;
            a.inter += s.n_interactions;
        }
    }
    const double nan = std::nan("");
    const auto ratio = [&](double x, double n) { return n > 0 ? x / n : nan; };
    std::vector<LlmProfile> out;
    for (const auto& [llm, a] : acc) {
        LlmProfile p;
        p.llm = llm;
        p.avg_n_specs = ratio(a.specs, static_cast<double>(a.experiments.size()));
        p.pct_converged = 100 * ratio(a.converged, a.specs);
        p.avg_n_vars = ratio(a.vars, a.with_stats);
        p.avg_n_params = ratio(a.params, a.with_stats);
        p.pct_generic = 100 * ratio(a.generic, a.generic + a.altspec);
        p.pct_altspecific = 100 * ratio(a.altspec, a.generic + a.altspec);
        p.pct_asc_included = 100 * ratio(a.asc, a.with_stats);
        p.avg_socioeconomics = ratio(a.socio, a.with_stats);
        p.avg_transformations = ratio(a.transf, a.with_stats);
        p.avg_interactions = ratio(a.inter, a.with_stats);
        out.push_back(p);
    }
    return out;
}

std::string profile_table(const std::vector<LlmProfile>& profiles) {
    const auto f = [](double v, int d) { return std::isfinite(v) ? text::fixed(v, d) : std::string("--"); };
    std::string out =
        "# Specification profile per LLM\n\n"
        "| LLM | Av. specs | % converged | Av. vars | Av. params | % generic | % alt-specific | % with ASC | "
        "Av. socio-economic | Av. transformations | Av. interactions |\n"
        "| --- | ---: | ---: | ---: | ---: | ---: | ---: | ---: | ---: | ---: | ---: |\n";
    for (const auto& p : profiles)
        out += "| " + p.llm + " | " + f(p.avg_n_specs, 2) + " | " + f(p.pct_converged, 1) + " | " + f(p.avg_n_vars, 2) +
               " | " + f(p.avg_n_params, 2) + " | " + f(p.pct_generic, 1) + " | " + f(p.pct_altspecific, 1) + " | " +
               f(p.pct_asc_included, 1) + " | " + f(p.avg_socioeconomics, 2) + " | " + f(p.avg_transformations, 2) +
               " | " + f(p.avg_interactions, 2) + " |\n";
    out += "\nAverages cover every generated specification, converged or not. Percentages of generic and "
           "alternative-specific parameters are pooled over taste parameters.\n";
    return out;
}

std::string distribution_export(const std::vector<ExperimentResult>& results, Metric metric) {
    const auto quote = [](const std::string& s) {
        if (s.find_first_of(",\"\n") == std::string::npos) return s;
        std::string q = "\"";
        for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
        return q + "\"";
    };
    std::string out = metric == Metric::vot ? "model,experiment,spec,value,reliable\n" : "model,experiment,spec,value\n";
    for (const auto& res : results)
        for (const auto& r : res.records) {
            if (!r.estimation || !r.estimation->converged) continue;
            const auto v = metric_value(r, metric);
            if (!v || !std::isfinite(*v)) continue;
            out += quote(r.llm()) + "," + std::to_string(res.config.id) + "," + quote(r.spec_name) + "," +
                   text::shortest(*v);
            if (metric == Metric::vot) out += r.vot->reliable ? ",true" : ",false";
            out += "\n";
        }
    return out;
}

}  // namespace dcm
