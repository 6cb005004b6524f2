#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dcm/dataset.hpp"

namespace dcm {

enum class Op {
    constant,
    var,
    param,
    add,
    sub,
    mul,
    div,
    neg,
    log,
    exp,
    sqrt,
    pow,        // args[0] ^ value
    boxcox,     // (args[0]^λ - 1) / λ, λ = parameter `name`
    piecewise,  // piecewise-linear in variable `name`, one slope parameter per segment
};

/// Utility expression tree. Field use depends on `op`; unused fields stay empty.
struct Expr {
    Op op = Op::constant;
    double value = 0;                 // constant, pow exponent
    std::string name;                 // var, param, boxcox shape parameter, piecewise variable
    std::vector<double> knots;        // piecewise, strictly increasing
    std::vector<std::string> slopes;  // piecewise, knots.size() + 1 parameters
    std::vector<Expr> args;

    static Expr constant(double v) { return {Op::constant, v, {}, {}, {}, {}}; }
    static Expr var(std::string n) { return {Op::var, 0, std::move(n), {}, {}, {}}; }
    static Expr param(std::string n) { return {Op::param, 0, std::move(n), {}, {}, {}}; }
    static Expr unary(Op op, Expr a) { return {op, 0, {}, {}, {}, {std::move(a)}}; }
    static Expr binary(Op op, Expr a, Expr b) { return {op, 0, {}, {}, {}, {std::move(a), std::move(b)}}; }
    static Expr pow(Expr a, double exponent) { return {Op::pow, exponent, {}, {}, {}, {std::move(a)}}; }
    static Expr boxcox(Expr a, std::string shape) { return {Op::boxcox, 0, std::move(shape), {}, {}, {std::move(a)}}; }
    static Expr piecewise(std::string variable, std::vector<double> knots, std::vector<std::string> slopes) {
        return {Op::piecewise, 0, std::move(variable), std::move(knots), std::move(slopes), {}};
    }

    bool operator==(const Expr&) const = default;
};

enum class ParamRole { asc, taste, shape };
const char* to_string(ParamRole r);

struct ParameterDecl {
    std::string name;
    ParamRole role = ParamRole::taste;
    std::string alternative;  // empty: generic
    std::optional<double> fixed;
    double start = 0;

    bool is_free() const { return !fixed.has_value(); }
    bool operator==(const ParameterDecl&) const = default;
};

struct UtilitySpec {
    std::string name;
    std::vector<std::string> alternatives;  // utilities order
    std::map<std::string, Expr> utilities;
    std::vector<ParameterDecl> parameters;  // declaration order
    std::string metadata;

    const ParameterDecl* find_parameter(const std::string& n) const;
    const Expr* utility(const std::string& alt) const;

    bool operator==(const UtilitySpec&) const = default;
};

/// Parses `.dcm` source. Grammar, one statement per line, `#` comments:
///
///     spec <name>
///     meta <free text>
///     alt <id> <id> ...
///     param <name> [asc|taste|shape] [generic|alt <id>] [fixed <real>] [start <real>]
///     U(<alt>) = <expression>
///
/// Identifiers in expressions resolve to declared parameters, otherwise to
/// data variables. Undeclared identifiers with a parameter-style prefix
/// (asc_, b_, beta_, lambda_) raise UndeclaredParameter. Omitted roles and
/// scopes are inferred from usage.
UtilitySpec parse_spec(const std::string& source);

/// Canonical `.dcm` text; parse_spec(serialize_spec(s)) == s.
std::string serialize_spec(const UtilitySpec& spec);
std::string serialize_expr(const Expr& e);

struct SpecStats {
    int n_params = 0;
    int n_vars = 0;
    bool has_asc = false;
    int n_generic = 0;
    int n_altspecific = 0;
    int n_socioeconomic = 0;
    int n_transformations = 0;
    int n_interactions = 0;

    bool operator==(const SpecStats&) const = default;
};

/// Structural counts. Free parameters are those used in some utility and not fixed.
SpecStats analyze_structure(const UtilitySpec& spec, const DataDictionary& dictionary);

/// Names of parameters referenced anywhere in an expression.
void collect_parameters(const Expr& e, std::set<std::string>& out);
void collect_variables(const Expr& e, std::set<std::string>& out);

/// Parameters actually referenced by some utility, in declaration order.
std::vector<std::string> used_parameters(const UtilitySpec& spec);

/// One additive term of a utility, split into a constant multiplier and its factors.
struct Term {
    double multiplier = 1;
    std::vector<const Expr*> factors;
};
std::vector<Term> additive_terms(const Expr& utility);

/// A coefficient that multiplies a single time or cost attribute (directly or
/// through a monotone transform) with no covariate in the term.
struct MainEffect {
    std::string alternative;
    std::string parameter;
    std::string variable;
    Quantity quantity = Quantity::other;
    double multiplier = 1;  // constant factor in the term
    bool linear = true;
};
std::vector<MainEffect> main_effects(const UtilitySpec& spec, const DataDictionary& dictionary);

}  // namespace dcm
