#include <algorithm>

#include "dcm/error.hpp"
#include "dcm/spec.hpp"

namespace dcm {

namespace {

void terms(const Expr& e, double sign, std::vector<Term>& out);

void factors(const Expr& e, Term& t) {
    switch (e.op) {
        case Op::mul:
            factors(e.args[0], t);
            factors(e.args[1], t);
            return;
        case Op::div:
            if (e.args[1].op == Op::constant && e.args[1].value != 0) {
                factors(e.args[0], t);
                t.multiplier /= e.args[1].value;
                return;
            }
            t.factors.push_back(&e);
            return;
        case Op::neg:
            t.multiplier = -t.multiplier;
            factors(e.args[0], t);
            return;
        case Op::constant:
            t.multiplier *= e.value;
            return;
        default:
            t.factors.push_back(&e);
    }
}

void terms(const Expr& e, double sign, std::vector<Term>& out) {
    switch (e.op) {
        case Op::add:
            terms(e.args[0], sign, out);
            terms(e.args[1], sign, out);
            return;
        case Op::sub:
            terms(e.args[0], sign, out);
            terms(e.args[1], -sign, out);
            return;
        case Op::neg:
            terms(e.args[0], -sign, out);
            return;
        default: {
            Term t;
            t.multiplier = sign;
            factors(e, t);
            out.push_back(std::move(t));
        }
    }
}

void count_transformations(const Expr& e, int& n) {
    if (e.op == Op::log || e.op == Op::sqrt || e.op == Op::pow || e.op == Op::boxcox || e.op == Op::piecewise) ++n;
    for (const auto& a : e.args) count_transformations(a, n);
}

const DictionaryEntry& lookup(const DataDictionary& dict, const std::string& var) {
    const auto* entry = dict.find(var);
    if (!entry || (entry->kind != VarKind::attribute && entry->kind != VarKind::covariate))
        throw SpecError(SpecErrc::unknown_variable, "unknown variable '" + var + "'");
    return *entry;
}

// Monotone increasing transform of a single data variable, or the variable itself.
const Expr* single_variable(const Expr& e, bool& linear) {
    if (e.op == Op::var) {
        linear = true;
        return &e;
    }
    const bool increasing = e.op == Op::log || e.op == Op::sqrt || e.op == Op::boxcox || (e.op == Op::pow && e.value > 0);
    if (increasing && e.args[0].op == Op::var) {
        linear = false;
        return &e.args[0];
    }
    return nullptr;
}

}  // namespace

std::vector<Term> additive_terms(const Expr& utility) {
    std::vector<Term> out;
    terms(utility, 1.0, out);
    return out;
}

void collect_parameters(const Expr& e, std::set<std::string>& out) {
    if (e.op == Op::param || e.op == Op::boxcox) out.insert(e.name);
    if (e.op == Op::piecewise) out.insert(e.slopes.begin(), e.slopes.end());
    for (const auto& a : e.args) collect_parameters(a, out);
}

void collect_variables(const Expr& e, std::set<std::string>& out) {
    if (e.op == Op::var || e.op == Op::piecewise) out.insert(e.name);
    for (const auto& a : e.args) collect_variables(a, out);
}

std::vector<std::string> used_parameters(const UtilitySpec& spec) {
    std::set<std::string> used;
    for (const auto& [alt, e] : spec.utilities) collect_parameters(e, used);
    std::vector<std::string> out;
    for (const auto& p : spec.parameters)
        if (used.count(p.name)) out.push_back(p.name);
    return out;
}

SpecStats analyze_structure(const UtilitySpec& spec, const DataDictionary& dictionary) {
    SpecStats s;
    std::set<std::string> vars;
    std::map<std::string, std::set<std::string>> param_alts;
    for (const auto& [alt, e] : spec.utilities) {
        collect_variables(e, vars);
        std::set<std::string> ps;
        collect_parameters(e, ps);
        for (const auto& p : ps) param_alts[p].insert(alt);
        count_transformations(e, s.n_transformations);
    }

    std::set<std::string> covariates;
    for (const auto& v : vars)
        if (lookup(dictionary, v).kind == VarKind::covariate) covariates.insert(v);
    s.n_vars = static_cast<int>(vars.size());
    s.n_socioeconomic = static_cast<int>(covariates.size());

    for (const auto& p : spec.parameters) {
        if (!param_alts.count(p.name) || !p.is_free()) continue;
        ++s.n_params;
        if (p.role == ParamRole::asc) s.has_asc = true;
        if (p.role == ParamRole::taste) (param_alts[p.name].size() >= 2 ? s.n_generic : s.n_altspecific)++;
    }

    // An interaction is a product term holding an attribute and a covariate.
    // Terms sharing the same parameters (a generic interaction repeated per
    // alternative) count once.
    std::set<std::vector<std::string>> interactions;
    for (const auto& [alt, e] : spec.utilities)
        for (const auto& t : additive_terms(e)) {
            std::set<std::string> tv, tp;
            for (const auto* f : t.factors) {
                collect_variables(*f, tv);
                collect_parameters(*f, tp);
            }
            bool attr = false, cov = false;
            for (const auto& v : tv) (dictionary.find(v)->kind == VarKind::covariate ? cov : attr) = true;
            if (!attr || !cov) continue;
            const auto& key_src = tp.empty() ? tv : tp;
            interactions.insert(std::vector<std::string>(key_src.begin(), key_src.end()));
        }
    s.n_interactions = static_cast<int>(interactions.size());
    return s;
}

std::vector<MainEffect> main_effects(const UtilitySpec& spec, const DataDictionary& dictionary) {
    std::vector<MainEffect> out;
    for (const auto& alt : spec.alternatives) {
        const auto* u = spec.utility(alt);
        if (!u) continue;
        for (const auto& t : additive_terms(*u)) {
            if (t.factors.size() == 1 && t.factors[0]->op == Op::piecewise) {
                const auto& pw = *t.factors[0];
                const auto& entry = lookup(dictionary, pw.name);
                if (entry.kind != VarKind::attribute || entry.quantity == Quantity::other) continue;
                for (const auto& s : pw.slopes) out.push_back({alt, s, pw.name, entry.quantity, t.multiplier, false});
                continue;
            }
            if (t.factors.size() != 2) continue;
            for (int k = 0; k < 2; ++k) {
                const auto* p = t.factors[k];
                const auto* x = t.factors[1 - k];
                if (p->op != Op::param) continue;
                bool linear = true;
                const auto* v = single_variable(*x, linear);
                if (!v) continue;
                const auto& entry = lookup(dictionary, v->name);
                if (entry.kind != VarKind::attribute || entry.quantity == Quantity::other) continue;
                out.push_back({alt, p->name, v->name, entry.quantity, t.multiplier, linear});
                break;
            }
        }
    }
    return out;
}

}  // namespace dcm
