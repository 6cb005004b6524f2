#include "dcm/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "dcm/error.hpp"

namespace dcm {

namespace {

using Code = Program::Code;

class Compiler {
public:
    Compiler(Program& p, const std::function<int(const std::string&)>& var_index,
             const std::function<int(const std::string&)>& param_slot)
        : p_(p), var_(var_index), param_(param_slot) {}

    void emit(const Expr& e) {
        switch (e.op) {
            case Op::constant: push({Code::constant, e.value, -1}, +1); return;
            case Op::var: push({Code::var, 0, var_(e.name)}, +1); return;
            case Op::param: push({Code::param, 0, param_(e.name)}, +1); return;
            case Op::add:
            case Op::sub:
            case Op::mul:
            case Op::div:
                emit(e.args[0]);
                emit(e.args[1]);
                push({binary(e.op), 0, -1}, -1);
                return;
            case Op::neg: unary(e, Code::neg); return;
            case Op::log: unary(e, Code::log); return;
            case Op::exp: unary(e, Code::exp); return;
            case Op::sqrt: unary(e, Code::sqrt); return;
            case Op::pow:
                emit(e.args[0]);
                push({Code::pow, e.value, -1}, 0);
                return;
            case Op::boxcox:
                emit(e.args[0]);
                push({Code::boxcox, 0, param_(e.name)}, 0);
                return;
            case Op::piecewise: {
                Program::Piecewise pw{var_(e.name), e.knots, {}};
                for (const auto& s : e.slopes) pw.slots.push_back(param_(s));
                p_.piecewise.push_back(std::move(pw));
                push({Code::piecewise, 0, static_cast<int>(p_.piecewise.size() - 1)}, +1);
                return;
            }
        }
    }

private:
    static Code binary(Op op) {
        switch (op) {
            case Op::add: return Code::add;
            case Op::sub: return Code::sub;
            case Op::mul: return Code::mul;
            default: return Code::div;
        }
    }
    void unary(const Expr& e, Code c) {
        emit(e.args[0]);
        push({c, 0, -1}, 0);
    }
    void push(Program::Instr in, int delta) {
        p_.code.push_back(in);
        depth_ += delta;
        p_.max_depth = std::max(p_.max_depth, static_cast<std::size_t>(depth_));
    }

    Program& p_;
    const std::function<int(const std::string&)>& var_;
    const std::function<int(const std::string&)>& param_;
    int depth_ = 0;
};

// Segment lengths of x for a piecewise-linear term: min(x, c1), then the part
// of x inside each [c_k, c_k+1], then max(x - cK, 0).
double segment(double x, const std::vector<double>& knots, std::size_t k) {
    if (k == 0) return std::min(x, knots[0]);
    if (k == knots.size()) return std::max(x - knots.back(), 0.0);
    return std::clamp(x - knots[k - 1], 0.0, knots[k] - knots[k - 1]);
}

bool data_only(const Expr& e) {
    if (e.op == Op::param || e.op == Op::boxcox || e.op == Op::piecewise) return false;
    return std::all_of(e.args.begin(), e.args.end(), data_only);
}

}  // namespace

Program compile(const Expr& e, const std::function<int(const std::string&)>& var_index,
                const std::function<int(const std::string&)>& param_slot) {
    Program p;
    Compiler(p, var_index, param_slot).emit(e);
    return p;
}

double Program::eval(std::span<const double> row, std::span<const double> params, std::vector<double>& st) const {
    if (st.size() < max_depth) st.resize(max_depth);
    std::size_t sp = 0;
    for (const auto& in : code) {
        switch (in.code) {
            case Code::constant: st[sp++] = in.value; break;
            case Code::var: st[sp++] = row[in.index]; break;
            case Code::param: st[sp++] = params[in.index]; break;
            case Code::add: --sp; st[sp - 1] += st[sp]; break;
            case Code::sub: --sp; st[sp - 1] -= st[sp]; break;
            case Code::mul: --sp; st[sp - 1] *= st[sp]; break;
            case Code::div: --sp; st[sp - 1] /= st[sp]; break;
            case Code::neg: st[sp - 1] = -st[sp - 1]; break;
            case Code::log: st[sp - 1] = std::log(st[sp - 1]); break;
            case Code::exp: st[sp - 1] = std::exp(st[sp - 1]); break;
            case Code::sqrt: st[sp - 1] = std::sqrt(st[sp - 1]); break;
            case Code::pow: st[sp - 1] = std::pow(st[sp - 1], in.value); break;
            case Code::boxcox: {
                const double lam = params[in.index];
                const double z = lam * std::log(st[sp - 1]);
                st[sp - 1] = std::abs(z) < 1e-3 ? std::log(st[sp - 1]) * (1 + z / 2 + z * z / 6 + z * z * z / 24)
                                                : std::expm1(z) / lam;
                break;
            }
            case Code::piecewise: {
                const auto& pw = piecewise[in.index];
                const double x = row[pw.variable];
                double v = 0;
                for (std::size_t k = 0; k < pw.slots.size(); ++k) v += params[pw.slots[k]] * segment(x, pw.knots, k);
                st[sp++] = v;
                break;
            }
        }
    }
    return st[0];
}

void Program::eval_dual(std::span<const double> row, std::span<const double> params, std::span<const int> dir,
                        std::size_t n, std::vector<Dual>& st) const {
    if (st.size() < max_depth) st.resize(max_depth);
    std::size_t sp = 0;
    auto leaf = [&](double v, int slot) {
        Dual& d = st[sp++];
        d.set_constant(n, v);
        if (slot >= 0 && dir[slot] >= 0) d.d[dir[slot]] = 1.0;
    };
    for (const auto& in : code) {
        switch (in.code) {
            case Code::constant: leaf(in.value, -1); break;
            case Code::var: leaf(row[in.index], -1); break;
            case Code::param: leaf(params[in.index], in.index); break;
            case Code::add: --sp; st[sp - 1] += st[sp]; break;
            case Code::sub: --sp; st[sp - 1] -= st[sp]; break;
            case Code::mul: --sp; st[sp - 1] *= st[sp]; break;
            case Code::div: --sp; st[sp - 1] /= st[sp]; break;
            case Code::neg: st[sp - 1].negate(); break;
            case Code::log: st[sp - 1].log_inplace(); break;
            case Code::exp: st[sp - 1].exp_inplace(); break;
            case Code::sqrt: st[sp - 1].sqrt_inplace(); break;
            case Code::pow: st[sp - 1].pow_inplace(in.value); break;
            case Code::boxcox: {
                Dual lam(n, params[in.index]);
                if (dir[in.index] >= 0) lam.d[dir[in.index]] = 1.0;
                st[sp - 1].boxcox_inplace(lam);
                break;
            }
            case Code::piecewise: {
                const auto& pw = piecewise[in.index];
                const double x = row[pw.variable];
                Dual& d = st[sp++];
                d.set_constant(n, 0.0);
                for (std::size_t k = 0; k < pw.slots.size(); ++k) {
                    const double s = segment(x, pw.knots, k);
                    d.v += params[pw.slots[k]] * s;
                    if (dir[pw.slots[k]] >= 0) d.d[dir[pw.slots[k]]] += s;
                }
                break;
            }
        }
    }
}

ParameterVector BoundModel::start_values() const { return {free_names_, free_start_}; }

void BoundModel::expand(std::span<const double> theta, std::vector<double>& slots) const {
    slots = slot_fixed_;
    for (std::size_t i = 0; i < free_slots_.size(); ++i) slots[free_slots_[i]] = theta[i];
}

namespace {

const char* domain_name(Op op) {
    switch (op) {
        case Op::log: return "log";
        case Op::sqrt: return "sqrt";
        case Op::boxcox: return "boxcox";
        default: return "pow";
    }
}

// Throws DomainViolation when a data-only argument of log, sqrt, boxcox or a
// fractional/negative power leaves the function's domain on an available row.
void check_domain(const Expr& e, const Dataset& data, std::size_t alt,
                  const std::function<int(const std::string&)>& var_index) {
    for (const auto& a : e.args) check_domain(a, data, alt, var_index);
    const bool guarded = e.op == Op::log || e.op == Op::sqrt || e.op == Op::boxcox ||
                         (e.op == Op::pow && (e.value != std::floor(e.value) || e.value < 0));
    if (!guarded || !data_only(e.args[0])) return;
    const auto no_param = [](const std::string&) { return -1; };
    const Program arg = compile(e.args[0], var_index, no_param);
    std::vector<double> stack;
    for (std::size_t r = 0; r < data.n_obs(); ++r) {
        if (!data.available(r, alt)) continue;
        const double x = arg.eval(data.row_values(r), {}, stack);
        bool bad;
        switch (e.op) {
            case Op::log:
            case Op::boxcox: bad = !(x > 0); break;
            case Op::sqrt: bad = !(x >= 0); break;
            default: bad = (e.value != std::floor(e.value) && x < 0) || (e.value < 0 && x == 0); break;
        }
        if (bad)
            throw SpecError(SpecErrc::domain_violation, std::string(domain_name(e.op)) + " of " + serialize_expr(e.args[0]) +
                                                            " is undefined on row " + std::to_string(r + 1) +
                                                            " (value " + std::to_string(x) + ")");
    }
}

}  // namespace

BoundModel bind(const UtilitySpec& spec, const Dataset& data) {
    BoundModel m;
    m.spec_ = spec;
    m.data_ = &data;

    for (const auto& [alt, e] : spec.utilities)
        if (!data.alternative_index(alt))
            throw SpecError(SpecErrc::missing_alternative, "alternative '" + alt + "' is not in the dataset");

    const auto used = used_parameters(spec);
    const std::set<std::string> used_set(used.begin(), used.end());
    std::map<std::string, int> slot_of;
    for (const auto& p : spec.parameters) {
        if (!used_set.count(p.name)) continue;
        const int slot = static_cast<int>(m.slot_names_.size());
        slot_of[p.name] = slot;
        m.slot_names_.push_back(p.name);
        m.slot_fixed_.push_back(p.fixed.value_or(0.0));
        if (p.is_free()) {
            m.slot_dir_.push_back(static_cast<int>(m.free_slots_.size()));
            m.free_slots_.push_back(slot);
            m.free_names_.push_back(p.name);
            m.free_start_.push_back(p.start);
        } else {
            m.slot_dir_.push_back(-1);
        }
    }

    const std::function<int(const std::string&)> var_index = [&](const std::string& v) {
        const auto* entry = data.dictionary().find(v);
        const auto idx = data.variable_index(v);
        if (!entry || !idx) throw SpecError(SpecErrc::unknown_variable, "unknown variable '" + v + "'");
        return static_cast<int>(*idx);
    };
    const std::function<int(const std::string&)> param_slot = [&](const std::string& n) {
        const auto it = slot_of.find(n);
        if (it == slot_of.end()) throw SpecError(SpecErrc::undeclared_parameter, "undeclared parameter '" + n + "'");
        return it->second;
    };

    m.programs_.resize(data.n_alternatives());
    for (const auto& [alt, e] : spec.utilities) {
        const std::size_t j = *data.alternative_index(alt);
        m.programs_[j] = compile(e, var_index, param_slot);
        check_domain(e, data, j, var_index);
    }
    return m;
}

}  // namespace dcm
