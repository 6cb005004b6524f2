#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "dcm/error.hpp"
#include "dcm/spec.hpp"
#include "dcm/text.hpp"

namespace dcm {

namespace {

enum class Tok { ident, number, lparen, rparen, lbracket, rbracket, comma, plus, minus, star, slash, end };

struct Token {
    Tok kind;
    std::string text;
    double number = 0;
    int col = 0;
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

struct Position {
    int line = 0;
    int col = 0;
};

class Lexer {
public:
    Lexer(std::string_view s, int line, int col_offset) : s_(s), line_(line), offset_(col_offset) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        std::size_t i = 0;
        while (i < s_.size()) {
            const char c = s_[i];
            const int col = offset_ + static_cast<int>(i) + 1;
            if (std::isspace(static_cast<unsigned char>(c))) {
                ++i;
            } else if (ident_start(c)) {
                std::size_t j = i;
                while (j < s_.size() && ident_char(s_[j])) ++j;
                out.push_back({Tok::ident, std::string(s_.substr(i, j - i)), 0, col});
                i = j;
            } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
                std::size_t j = i;
                while (j < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[j])) || s_[j] == '.')) ++j;
                if (j < s_.size() && (s_[j] == 'e' || s_[j] == 'E')) {
                    std::size_t k = j + 1;
                    if (k < s_.size() && (s_[k] == '+' || s_[k] == '-')) ++k;
                    if (k < s_.size() && std::isdigit(static_cast<unsigned char>(s_[k]))) {
                        while (k < s_.size() && std::isdigit(static_cast<unsigned char>(s_[k]))) ++k;
                        j = k;
                    }
                }
                const auto v = text::parse_double(s_.substr(i, j - i));
                if (!v) throw SpecError(SpecErrc::syntax, "malformed number", line_, col);
                out.push_back({Tok::number, std::string(s_.substr(i, j - i)), *v, col});
                i = j;
            } else {
                Tok k;
                switch (c) {
                    case '(': k = Tok::lparen; break;
                    case ')': k = Tok::rparen; break;
                    case '[': k = Tok::lbracket; break;
                    case ']': k = Tok::rbracket; break;
                    case ',': k = Tok::comma; break;
                    case '+': k = Tok::plus; break;
                    case '-': k = Tok::minus; break;
                    case '*': k = Tok::star; break;
                    case '/': k = Tok::slash; break;
                    default:
                        throw SpecError(SpecErrc::syntax, std::string("unexpected character '") + c + "'", line_, col);
                }
                out.push_back({k, std::string(1, c), 0, col});
                ++i;
            }
        }
        out.push_back({Tok::end, "", 0, offset_ + static_cast<int>(s_.size()) + 1});
        return out;
    }

private:
    std::string_view s_;
    int line_;
    int offset_;
};

/// Recursive-descent expression parser. Identifiers come out as Op::var and
/// are resolved to parameters once all declarations are known.
class ExprParser {
public:
    ExprParser(std::vector<Token> toks, int line, std::map<std::string, Position>& first_use)
        : t_(std::move(toks)), line_(line), first_use_(first_use) {}

    Expr parse() {
        auto e = expr();
        if (peek().kind != Tok::end) fail("unexpected '" + peek().text + "'");
        return e;
    }

private:
    const Token& peek() const { return t_[pos_]; }
    Token next() { return t_[pos_++]; }
    [[noreturn]] void fail(const std::string& msg) const { throw SpecError(SpecErrc::syntax, msg, line_, peek().col); }
    void expect(Tok k, const char* what) {
        if (peek().kind != k) fail(std::string("expected ") + what);
        ++pos_;
    }
    void note(const Token& tok) { first_use_.emplace(tok.text, Position{line_, tok.col}); }

    Expr expr() {
        auto lhs = term();
        while (peek().kind == Tok::plus || peek().kind == Tok::minus) {
            const auto op = next().kind == Tok::plus ? Op::add : Op::sub;
            lhs = Expr::binary(op, std::move(lhs), term());
        }
        return lhs;
    }

    Expr term() {
        auto lhs = unary();
        while (peek().kind == Tok::star || peek().kind == Tok::slash) {
            const auto op = next().kind == Tok::star ? Op::mul : Op::div;
            lhs = Expr::binary(op, std::move(lhs), unary());
        }
        return lhs;
    }

    Expr unary() {
        if (peek().kind == Tok::minus) {
            next();
            if (peek().kind == Tok::number) return Expr::constant(-next().number);
            return Expr::unary(Op::neg, unary());
        }
        return primary();
    }

    double signed_number() {
        double sign = 1;
        if (peek().kind == Tok::minus) {
            next();
            sign = -1;
        } else if (peek().kind == Tok::plus) {
            next();
        }
        if (peek().kind != Tok::number) fail("expected a number");
        return sign * next().number;
    }

    std::string identifier(const char* what) {
        if (peek().kind != Tok::ident) fail(std::string("expected ") + what);
        auto tok = next();
        note(tok);
        return tok.text;
    }

    Expr primary() {
        const auto& tok = peek();
        if (tok.kind == Tok::number) return Expr::constant(next().number);
        if (tok.kind == Tok::lparen) {
            next();
            auto e = expr();
            expect(Tok::rparen, "')'");
            return e;
        }
        if (tok.kind != Tok::ident) fail(tok.kind == Tok::end ? "unexpected end of expression" : "unexpected '" + tok.text + "'");
        auto id = next();
        if (peek().kind != Tok::lparen) {
            note(id);
            return Expr::var(id.text);
        }
        next();  // '('
        const auto& f = id.text;
        Expr out;
        if (f == "log" || f == "exp" || f == "sqrt") {
            out = Expr::unary(f == "log" ? Op::log : f == "exp" ? Op::exp : Op::sqrt, expr());
        } else if (f == "pow") {
            auto base = expr();
            expect(Tok::comma, "','");
            out = Expr::pow(std::move(base), signed_number());
        } else if (f == "boxcox") {
            auto base = expr();
            expect(Tok::comma, "','");
            out = Expr::boxcox(std::move(base), identifier("a shape parameter"));
        } else if (f == "piecewise") {
            auto variable = identifier("a variable");
            expect(Tok::comma, "','");
            expect(Tok::lbracket, "'['");
            std::vector<double> knots;
            if (peek().kind != Tok::rbracket) {
                knots.push_back(signed_number());
                while (peek().kind == Tok::comma) {
                    next();
                    knots.push_back(signed_number());
                }
            }
            expect(Tok::rbracket, "']'");
            expect(Tok::comma, "','");
            expect(Tok::lbracket, "'['");
            std::vector<std::string> slopes{identifier("a parameter")};
            while (peek().kind == Tok::comma) {
                next();
                slopes.push_back(identifier("a parameter"));
            }
            expect(Tok::rbracket, "']'");
            if (slopes.size() != knots.size() + 1)
                throw SpecError(SpecErrc::syntax, "piecewise needs one parameter more than knots", line_, id.col);
            for (std::size_t k = 1; k < knots.size(); ++k)
                if (!(knots[k] > knots[k - 1]))
                    throw SpecError(SpecErrc::syntax, "piecewise knots must be strictly increasing", line_, id.col);
            out = Expr::piecewise(std::move(variable), std::move(knots), std::move(slopes));
        } else {
            throw SpecError(SpecErrc::unknown_function, "unknown function '" + f + "'", line_, id.col);
        }
        expect(Tok::rparen, "')'");
        return out;
    }

    std::vector<Token> t_;
    std::size_t pos_ = 0;
    int line_;
    std::map<std::string, Position>& first_use_;
};

bool parameter_style(const std::string& name) {
    for (const char* prefix : {"asc_", "b_", "beta_", "lambda_"})
        if (name.rfind(prefix, 0) == 0) return true;
    return name == "asc";
}

bool valid_name(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
    });
}

void resolve(Expr& e, const std::set<std::string>& params) {
    if (e.op == Op::var && params.count(e.name)) e.op = Op::param;
    for (auto& a : e.args) resolve(a, params);
}

// Counts how a parameter is used: standalone additive terms per alternative,
// any other use, and use as a Box-Cox shape.
struct Usage {
    std::map<std::string, int> standalone;  // alternative -> count
    std::set<std::string> alternatives;
    int other = 0;
    bool shape = false;
};

void scan_usage(const Expr& e, const std::string& alt, std::map<std::string, Usage>& usage) {
    if (e.op == Op::param) {
        usage[e.name].alternatives.insert(alt);
        usage[e.name].other++;
    }
    if (e.op == Op::boxcox) {
        usage[e.name].alternatives.insert(alt);
        usage[e.name].shape = true;
    }
    if (e.op == Op::piecewise)
        for (const auto& s : e.slopes) {
            usage[s].alternatives.insert(alt);
            usage[s].other++;
        }
    for (const auto& a : e.args) scan_usage(a, alt, usage);
}

}  // namespace

const char* to_string(ParamRole r) {
    switch (r) {
        case ParamRole::asc: return "asc";
        case ParamRole::taste: return "taste";
        case ParamRole::shape: return "shape";
    }
    return "taste";
}

const ParameterDecl* UtilitySpec::find_parameter(const std::string& n) const {
    for (const auto& p : parameters)
        if (p.name == n) return &p;
    return nullptr;
}

const Expr* UtilitySpec::utility(const std::string& alt) const {
    const auto it = utilities.find(alt);
    return it == utilities.end() ? nullptr : &it->second;
}

UtilitySpec parse_spec(const std::string& source) {
    UtilitySpec spec;
    struct PendingParam {
        ParameterDecl decl;
        bool role_given = false;
        bool scope_given = false;
        bool start_given = false;
        int line = 0;
    };
    std::vector<PendingParam> pending;
    std::map<std::string, Position> first_use;
    std::map<std::string, int> utility_line;
    std::vector<std::string> utility_order;
    bool have_alt_line = false;
    std::vector<std::string> meta_lines;

    std::istringstream in(source);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = raw;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        const auto lead = line.find_first_not_of(" \t\r");
        if (lead == std::string_view::npos) continue;
        const auto stmt = text::trim(line);
        const int base_col = static_cast<int>(lead);

        auto words = [&] {
            std::vector<std::string> w;
            std::istringstream ws{std::string(stmt)};
            std::string x;
            while (ws >> x) w.push_back(x);
            return w;
        };

        if (stmt.rfind("U(", 0) == 0 || stmt.rfind("U (", 0) == 0) {
            const auto close = stmt.find(')');
            const auto eq = stmt.find('=');
            if (close == std::string_view::npos || eq == std::string_view::npos || eq < close)
                throw SpecError(SpecErrc::syntax, "expected 'U(<alt>) = <expression>'", line_no, base_col + 1);
            const auto open = stmt.find('(');
            const auto alt = std::string(text::trim(stmt.substr(open + 1, close - open - 1)));
            if (!valid_name(alt)) throw SpecError(SpecErrc::syntax, "bad alternative name", line_no, base_col + 3);
            if (!text::trim(stmt.substr(close + 1, eq - close - 1)).empty())
                throw SpecError(SpecErrc::syntax, "expected '=' after U(...)", line_no, base_col + int(close) + 2);
            if (utility_line.count(alt))
                throw SpecError(SpecErrc::syntax, "second utility for alternative '" + alt + "'", line_no, base_col + 1);
            const auto rhs = stmt.substr(eq + 1);
            auto toks = Lexer(rhs, line_no, base_col + static_cast<int>(eq) + 1).run();
            spec.utilities[alt] = ExprParser(std::move(toks), line_no, first_use).parse();
            utility_line[alt] = line_no;
            utility_order.push_back(alt);
            continue;
        }

        const auto w = words();
        const auto& kw = w[0];
        if (kw == "spec") {
            if (w.size() != 2 || !valid_name(w[1]))
                throw SpecError(SpecErrc::syntax, "expected 'spec <name>'", line_no, base_col + 1);
            spec.name = w[1];
        } else if (kw == "meta") {
            meta_lines.emplace_back(text::trim(stmt.substr(4)));
        } else if (kw == "alt") {
            if (have_alt_line) throw SpecError(SpecErrc::syntax, "duplicate 'alt' statement", line_no, base_col + 1);
            if (w.size() < 2) throw SpecError(SpecErrc::syntax, "expected 'alt <id> ...'", line_no, base_col + 1);
            have_alt_line = true;
            for (std::size_t i = 1; i < w.size(); ++i) {
                if (!valid_name(w[i]) || std::count(w.begin() + 1, w.end(), w[i]) > 1)
                    throw SpecError(SpecErrc::syntax, "bad or repeated alternative '" + w[i] + "'", line_no, base_col + 1);
                spec.alternatives.push_back(w[i]);
            }
        } else if (kw == "param") {
            if (w.size() < 2 || !ident_start(w[1][0]) ||
                !std::all_of(w[1].begin(), w[1].end(), ident_char))
                throw SpecError(SpecErrc::syntax, "expected 'param <name> ...'", line_no, base_col + 1);
            PendingParam p;
            p.decl.name = w[1];
            p.line = line_no;
            for (std::size_t i = 2; i < w.size(); ++i) {
                const auto& k = w[i];
                auto number_after = [&](const char* what) {
                    if (i + 1 >= w.size()) throw SpecError(SpecErrc::syntax, std::string("expected a number after ") + what, line_no, base_col + 1);
                    const auto v = text::parse_double(w[++i]);
                    if (!v || !std::isfinite(*v))
                        throw SpecError(SpecErrc::syntax, std::string("expected a number after ") + what, line_no, base_col + 1);
                    return *v;
                };
                if (k == "asc" || k == "taste" || k == "shape") {
                    p.decl.role = k == "asc" ? ParamRole::asc : k == "taste" ? ParamRole::taste : ParamRole::shape;
                    p.role_given = true;
                } else if (k == "generic") {
                    p.decl.alternative.clear();
                    p.scope_given = true;
                } else if (k == "alt") {
                    if (i + 1 >= w.size()) throw SpecError(SpecErrc::syntax, "expected an alternative after 'alt'", line_no, base_col + 1);
                    p.decl.alternative = w[++i];
                    p.scope_given = true;
                } else if (k == "fixed") {
                    p.decl.fixed = number_after("'fixed'");
                } else if (k == "start") {
                    p.decl.start = number_after("'start'");
                    p.start_given = true;
                } else {
                    throw SpecError(SpecErrc::syntax, "unknown parameter attribute '" + k + "'", line_no, base_col + 1);
                }
            }
            for (const auto& q : pending)
                if (q.decl.name == p.decl.name)
                    throw SpecError(SpecErrc::duplicate_parameter, "parameter '" + p.decl.name + "' declared twice",
                                    line_no, base_col + 1);
            pending.push_back(std::move(p));
        } else {
            throw SpecError(SpecErrc::syntax, "unknown statement '" + kw + "'", line_no, base_col + 1);
        }
    }

    for (std::size_t i = 0; i < meta_lines.size(); ++i) spec.metadata += (i ? "\n" : "") + meta_lines[i];

    if (!have_alt_line) {
        spec.alternatives = utility_order;
    } else {
        for (const auto& [alt, ln] : utility_line)
            if (std::find(spec.alternatives.begin(), spec.alternatives.end(), alt) == spec.alternatives.end())
                throw SpecError(SpecErrc::syntax, "utility for alternative '" + alt + "' not listed in 'alt'", ln, 1);
    }

    std::set<std::string> declared;
    for (const auto& p : pending) declared.insert(p.decl.name);
    for (auto& [alt, e] : spec.utilities) resolve(e, declared);

    // Undeclared names in parameter positions or with parameter-style prefixes.
    auto check_expr = [&](auto&& self, const Expr& e) -> void {
        auto undeclared = [&](const std::string& n) {
            const auto pos = first_use.count(n) ? first_use.at(n) : Position{};
            throw SpecError(SpecErrc::undeclared_parameter, "parameter '" + n + "' is not declared", pos.line, pos.col);
        };
        if (e.op == Op::var && parameter_style(e.name)) undeclared(e.name);
        if (e.op == Op::boxcox && !declared.count(e.name)) undeclared(e.name);
        if (e.op == Op::piecewise) {
            if (declared.count(e.name)) {
                const auto pos = first_use.at(e.name);
                throw SpecError(SpecErrc::syntax, "piecewise expects a data variable, got parameter '" + e.name + "'",
                                pos.line, pos.col);
            }
            for (const auto& s : e.slopes)
                if (!declared.count(s)) undeclared(s);
        }
        for (const auto& a : e.args) self(self, a);
    };
    for (const auto& [alt, e] : spec.utilities) check_expr(check_expr, e);

    std::map<std::string, Usage> usage;
    for (const auto& [alt, e] : spec.utilities) {
        scan_usage(e, alt, usage);
        for (const auto& t : additive_terms(e))
            if (t.factors.size() == 1 && t.factors[0]->op == Op::param) {
                usage[t.factors[0]->name].standalone[alt]++;
                usage[t.factors[0]->name].other--;
            }
    }

    for (auto& p : pending) {
        auto& d = p.decl;
        const auto u = usage.count(d.name) ? usage.at(d.name) : Usage{};
        const bool asc_shaped = u.other == 0 && !u.shape && u.standalone.size() == 1 && u.standalone.begin()->second == 1;
        if (p.role_given) {
            if (d.role == ParamRole::asc && !u.alternatives.empty() && !asc_shaped)
                throw SpecError(SpecErrc::invalid_asc,
                                "constant '" + d.name + "' must appear once, additively, in a single utility", p.line, 1);
        } else if (u.shape) {
            d.role = ParamRole::shape;
        } else if (asc_shaped) {
            d.role = ParamRole::asc;
        } else {
            d.role = ParamRole::taste;
        }
        if (!p.scope_given && u.alternatives.size() == 1) d.alternative = *u.alternatives.begin();
        if (!p.start_given) d.start = d.role == ParamRole::shape ? 1.0 : 0.0;
        spec.parameters.push_back(d);
    }
    return spec;
}

namespace {

int precedence(const Expr& e) {
    switch (e.op) {
        case Op::add:
        case Op::sub: return 1;
        case Op::mul:
        case Op::div: return 2;
        case Op::neg: return 3;
        case Op::constant: return e.value < 0 || (e.value == 0 && std::signbit(e.value)) ? 3 : 4;
        default: return 4;
    }
}

void write(const Expr& e, std::string& out);

void write_number(double v, std::string& out) { out += text::shortest(v); }

void write_child(const Expr& e, bool parens, std::string& out) {
    if (parens) out += '(';
    write(e, out);
    if (parens) out += ')';
}

void write(const Expr& e, std::string& out) {
    switch (e.op) {
        case Op::constant: write_number(e.value, out); return;
        case Op::var:
        case Op::param: out += e.name; return;
        case Op::add:
        case Op::sub:
        case Op::mul:
        case Op::div: {
            const int p = precedence(e);
            // a negative constant on the left of a product still binds tighter
            write_child(e.args[0], precedence(e.args[0]) < p, out);
            out += e.op == Op::add ? " + " : e.op == Op::sub ? " - " : e.op == Op::mul ? " * " : " / ";
            const auto& rhs = e.args[1];
            const bool rhs_negconst = rhs.op == Op::constant && precedence(rhs) == 3;
            write_child(rhs, !rhs_negconst && precedence(rhs) <= p, out);
            return;
        }
        case Op::neg: {
            const auto& a = e.args[0];
            out += '-';
            write_child(a, a.op == Op::constant || precedence(a) < 3, out);
            return;
        }
        case Op::log:
        case Op::exp:
        case Op::sqrt:
            out += e.op == Op::log ? "log(" : e.op == Op::exp ? "exp(" : "sqrt(";
            write(e.args[0], out);
            out += ')';
            return;
        case Op::pow:
            out += "pow(";
            write(e.args[0], out);
            out += ", ";
            write_number(e.value, out);
            out += ')';
            return;
        case Op::boxcox:
            out += "boxcox(";
            write(e.args[0], out);
            out += ", " + e.name + ")";
            return;
        case Op::piecewise:
            out += "piecewise(" + e.name + ", [";
            for (std::size_t i = 0; i < e.knots.size(); ++i) {
                if (i) out += ", ";
                write_number(e.knots[i], out);
            }
            out += "], [";
            for (std::size_t i = 0; i < e.slopes.size(); ++i) out += (i ? ", " : "") + e.slopes[i];
            out += "])";
            return;
    }
}

}  // namespace

std::string serialize_expr(const Expr& e) {
    std::string out;
    write(e, out);
    return out;
}

std::string serialize_spec(const UtilitySpec& spec) {
    std::string out;
    if (!spec.name.empty()) out += "spec " + spec.name + "\n";
    if (!spec.metadata.empty())
        for (const auto& l : text::split(spec.metadata, '\n')) out += "meta " + l + "\n";
    if (!spec.alternatives.empty()) {
        out += "alt";
        for (const auto& a : spec.alternatives) out += " " + a;
        out += "\n";
    }
    for (const auto& p : spec.parameters) {
        out += "param " + p.name + " " + to_string(p.role);
        out += p.alternative.empty() ? " generic" : " alt " + p.alternative;
        if (p.fixed) out += " fixed " + text::shortest(*p.fixed);
        out += " start " + text::shortest(p.start) + "\n";
    }
    for (const auto& a : spec.alternatives)
        if (const auto* u = spec.utility(a)) out += "U(" + a + ") = " + serialize_expr(*u) + "\n";
    return out;
}

}  // namespace dcm
