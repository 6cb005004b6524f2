#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>

#include "dcm/estimate.hpp"
#include "dcm/mnl.hpp"
#include "dcm/text.hpp"

namespace testing {

std::string source_path(const std::string& rel) { return std::string(DCM_SOURCE_DIR) + "/" + rel; }

const dcm::Dataset& synth_data() {
    static const dcm::Dataset data =
        dcm::load_dataset(source_path("data/modechoice_synth.csv"), source_path("data/modechoice.dict.md"));
    return data;
}

dcm::UtilitySpec load_spec(const std::string& rel) { return dcm::parse_spec(dcm::text::read_file(source_path(rel))); }

dcm::DataDictionary simple_dictionary(const std::vector<std::string>& alts) {
    std::string md = "| name | kind | alternative | quantity | units | description |\n| --- | --- | --- | --- | --- | --- |\n";
    md += "| id | id |  |  |  | row id |\n";
    for (const auto& a : alts) md += "| av_" + a + " | availability | " + a + " |  | 0/1 | |\n";
    for (const auto& a : alts) md += "| x_" + a + " | attribute | " + a + " | other | | |\n";
    md += "| z | covariate |  |  | | |\n";
    md += "| choice | choice |  |  |  | chosen |\n";
    return dcm::DataDictionary::parse_markdown(md);
}

dcm::Dataset simple_dataset(const std::vector<std::string>& alts, const std::string& csv) {
    return dcm::parse_dataset(csv, simple_dictionary(alts));
}

namespace {

struct Gen {
    std::mt19937_64& rng;
    std::vector<std::string> vars;
    std::vector<std::string> taste;
    std::vector<std::string> shapes;

    int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); }
    double number() {
        // short decimals and occasional awkward doubles
        if (pick(3) == 0) return std::uniform_real_distribution<double>(0, 1000)(rng);
        return pick(200) / 4.0;
    }

    dcm::Expr leaf() {
        switch (pick(3)) {
            case 0: return dcm::Expr::constant(number());
            case 1: return dcm::Expr::var(vars[pick(int(vars.size()))]);
            default: return dcm::Expr::param(taste[pick(int(taste.size()))]);
        }
    }

    dcm::Expr expr(int depth) {
        if (depth == 0) return leaf();
        switch (pick(12)) {
            case 0: return leaf();
            case 1: return dcm::Expr::binary(dcm::Op::add, expr(depth - 1), expr(depth - 1));
            case 2: return dcm::Expr::binary(dcm::Op::sub, expr(depth - 1), expr(depth - 1));
            case 3: return dcm::Expr::binary(dcm::Op::mul, expr(depth - 1), expr(depth - 1));
            case 4: return dcm::Expr::binary(dcm::Op::div, expr(depth - 1), expr(depth - 1));
            case 5: return dcm::Expr::unary(dcm::Op::neg, expr(depth - 1));
            case 6: return dcm::Expr::unary(pick(3) == 0 ? dcm::Op::log : pick(2) ? dcm::Op::exp : dcm::Op::sqrt,
                                            expr(depth - 1));
            case 7: {
                const double k = pick(2) ? double(pick(5)) : pick(9) / 4.0 - 1.0;
                return dcm::Expr::pow(expr(depth - 1), k);
            }
            case 8:
                if (!shapes.empty()) return dcm::Expr::boxcox(expr(depth - 1), shapes[pick(int(shapes.size()))]);
                return leaf();
            case 9: {
                std::vector<double> knots;
                double at = -50 + pick(40);
                for (int i = pick(3); i >= 0; --i) knots.push_back(at += 1 + pick(60));
                std::vector<std::string> slopes;
                for (std::size_t i = 0; i <= knots.size(); ++i) slopes.push_back(taste[pick(int(taste.size()))]);
                return dcm::Expr::piecewise(vars[pick(int(vars.size()))], knots, slopes);
            }
            default: return dcm::Expr::binary(dcm::Op::mul, dcm::Expr::param(taste[pick(int(taste.size()))]),
                                              expr(depth - 1));
        }
    }
};

}  // namespace

dcm::UtilitySpec random_spec(std::mt19937_64& rng) {
    static const std::vector<std::string> alt_pool{"car", "bus", "air", "rail", "walk", "bike"};
    Gen g{rng, {}, {}, {}};
    dcm::UtilitySpec s;
    s.name = "R" + std::to_string(g.pick(100000));
    if (g.pick(4) == 0) s.metadata = "generated " + std::to_string(g.pick(1000));
    const int n_alt = 1 + g.pick(4);
    for (int i = 0; i < n_alt; ++i) s.alternatives.push_back(alt_pool[i]);
    for (int i = 0, n = 1 + g.pick(5); i < n; ++i) g.vars.push_back("x" + std::to_string(i) + (i % 2 ? "_car" : ""));

    for (int i = 0, n = 1 + g.pick(5); i < n; ++i) {
        dcm::ParameterDecl p;
        p.name = "b_" + std::to_string(i);
        if (g.pick(3) == 0) p.alternative = s.alternatives[g.pick(n_alt)];
        if (g.pick(5) == 0) p.fixed = g.number();
        p.start = g.pick(2) ? 0.0 : -g.number();
        g.taste.push_back(p.name);
        s.parameters.push_back(p);
    }
    for (int i = 0, n = g.pick(3); i < n; ++i) {
        dcm::ParameterDecl p;
        p.name = "lambda_" + std::to_string(i);
        p.role = dcm::ParamRole::shape;
        p.start = 1 + g.pick(4) / 4.0;
        g.shapes.push_back(p.name);
        s.parameters.push_back(p);
    }
    for (const auto& a : s.alternatives) {
        if (g.pick(4) == 0) continue;  // V = 0
        auto body = g.expr(1 + g.pick(3));
        if (g.pick(2)) {
            dcm::ParameterDecl asc;
            asc.name = "asc_" + a;
            asc.role = dcm::ParamRole::asc;
            asc.alternative = a;
            if (g.pick(3) == 0) asc.fixed = 0.0;
            s.parameters.push_back(asc);
            body = dcm::Expr::binary(dcm::Op::add, dcm::Expr::param(asc.name), std::move(body));
        }
        s.utilities.emplace(a, std::move(body));
    }
    return s;
}

dcm::Dataset random_positive_dataset(std::mt19937_64& rng, std::size_t rows) {
    const std::vector<std::string> alts{"a", "b", "c"};
    std::uniform_real_distribution<double> x(0.5, 2.0);
    std::string csv = "id,av_a,av_b,av_c,x_a,x_b,x_c,z,choice\n";
    for (std::size_t r = 0; r < rows; ++r) {
        const int off = std::uniform_int_distribution<int>(-1, 2)(rng);  // -1: all available
        int choice;
        do choice = std::uniform_int_distribution<int>(0, 2)(rng);
        while (choice == off);
        csv += std::to_string(r + 1);
        for (int j = 0; j < 3; ++j) csv += j == off ? ",0" : ",1";
        for (int j = 0; j < 4; ++j) csv += "," + dcm::text::shortest(x(rng));
        csv += "," + std::to_string(choice + 1) + "\n";
    }
    return simple_dataset(alts, csv);
}

double max_gradient_rel_error(const dcm::BoundModel& model, const std::vector<double>& theta) {
    const auto g = dcm::gradient(model, theta);
    double worst = 0;
    for (std::size_t i = 0; i < theta.size(); ++i) {
        const double h = 1e-5 * std::max(1e-2, std::abs(theta[i]));
        auto up = theta, down = theta;
        up[i] += h;
        down[i] -= h;
        const double fd = (dcm::log_likelihood(model, up) - dcm::log_likelihood(model, down)) / (2 * h);
        worst = std::max(worst, std::abs(g[i] - fd) / std::max(1.0, std::abs(fd)));
    }
    return worst;
}

const std::vector<NodeCase>& node_type_cases() {
    static const std::string head = "alt a b c\nparam asc_b\nparam b_1\nparam b_2\nparam b_3\nparam lambda_1\n";
    static const std::vector<NodeCase> cases = [] {
        std::vector<NodeCase> v{
            {"constant", "U(a) = 0.5 * b_1\nU(b) = asc_b + 2\n"},
            {"var", "U(a) = b_1 * x_a\nU(b) = asc_b + b_1 * x_b\n"},
            {"param", "U(b) = asc_b\nU(c) = b_1\n"},
            {"add", "U(a) = b_1 * x_a + b_2 * z\nU(b) = asc_b + b_1 * x_b\n"},
            {"sub", "U(a) = b_1 * x_a - b_2 * z\nU(b) = asc_b - b_1 * x_b\n"},
            {"mul", "U(a) = b_1 * b_2 * x_a\nU(b) = asc_b + b_1 * x_b * z\n"},
            {"div", "U(a) = b_1 * x_a / (3 + b_2 * z)\nU(b) = asc_b + x_b / (4 + b_1)\n"},
            {"neg", "U(a) = -(b_1 * x_a)\nU(b) = asc_b - -b_2 * z\n"},
            {"log", "U(a) = b_1 * log(x_a)\nU(b) = asc_b + log(3 + b_2 * x_b)\n"},
            {"exp", "U(a) = exp(b_1 * x_a)\nU(b) = asc_b + b_2 * exp(z)\n"},
            {"sqrt", "U(a) = b_1 * sqrt(x_a)\nU(b) = asc_b + sqrt(4 + b_2 * x_b)\n"},
            {"pow", "U(a) = b_1 * pow(x_a, 1.5)\nU(b) = asc_b + pow(3 + b_2 * x_b, 2)\nU(c) = b_3 * pow(x_c, -0.5)\n"},
            {"boxcox", "U(a) = b_1 * boxcox(x_a, lambda_1)\nU(b) = asc_b + b_2 * boxcox(x_b, lambda_1)\n"},
            {"piecewise", "U(a) = piecewise(x_a, [0.8, 1.5], [b_1, b_2, b_3])\nU(b) = asc_b + piecewise(z, [1], [b_1, b_3])\n"},
        };
        for (auto& c : v) c.source = head + c.source;
        return v;
    }();
    return cases;
}

double node_case_worst_error(const NodeCase& c, std::mt19937_64& rng, int points) {
    static const dcm::Dataset data = [] {
        std::mt19937_64 r(7);
        return random_positive_dataset(r, 60);
    }();
    const auto model = dcm::bind(dcm::parse_spec(c.source), data);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double worst = 0;
    for (int k = 0; k < points; ++k) {
        std::vector<double> theta(model.n_free());
        for (std::size_t i = 0; i < theta.size(); ++i)
            theta[i] = model.free_names()[i].rfind("lambda_", 0) == 0 ? 1.0 + 0.8 * u(rng) : u(rng);
        worst = std::max(worst, max_gradient_rel_error(model, theta));
    }
    return worst;
}

double golden_section_max(const std::function<double(double)>& f, double lo, double hi, double tol) {
    const double r = (std::sqrt(5.0) - 1) / 2;
    double a = lo, b = hi;
    double c = b - r * (b - a), d = a + r * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    return (a + b) / 2;
}

dcm::Dataset scale_columns(const dcm::Dataset& d, const std::string& prefix, double factor) {
    std::vector<std::string> ids;
    std::vector<double> values;
    std::vector<unsigned char> available;
    std::vector<std::size_t> choices;
    for (std::size_t r = 0; r < d.n_obs(); ++r) {
        ids.push_back(d.person_id(r));
        for (std::size_t v = 0; v < d.n_variables(); ++v)
            values.push_back(d.value(r, v) * (d.variables()[v].rfind(prefix, 0) == 0 ? factor : 1.0));
        for (std::size_t j = 0; j < d.n_alternatives(); ++j) available.push_back(d.available(r, j) ? 1 : 0);
        choices.push_back(d.choice(r));
    }
    return dcm::Dataset(d.dictionary(), ids, values, available, choices);
}

OneDCheck one_parameter_check() {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> x(0.0, 3.0), u(0.0, 1.0);
    std::string csv = "id,av_a,av_b,x_a,x_b,z,choice\n";
    for (int r = 0; r < 400; ++r) {
        const double xa = x(rng), xb = x(rng);
        const double pa = 1 / (1 + std::exp(-0.7 * (xa - xb)));
        csv += std::to_string(r) + ",1,1," + dcm::text::shortest(xa) + "," + dcm::text::shortest(xb) + ",0," +
               (u(rng) < pa ? "1" : "2") + "\n";
    }
    const auto data = simple_dataset({"a", "b"}, csv);
    const auto model = dcm::bind(dcm::parse_spec("alt a b\nparam b_x\nU(a) = b_x * x_a\nU(b) = b_x * x_b\n"), data);
    const auto r = dcm::estimate(model);
    const double g = golden_section_max([&](double b) { return dcm::log_likelihood(model, std::vector<double>{b}); },
                                        -10, 10, 1e-11);
    return {r.estimates[0], g, r.converged};
}

ShareCheck asc_share_check() {
    std::mt19937_64 rng(5);
    std::discrete_distribution<int> pick({0.1, 0.2, 0.3, 0.4});
    std::string csv = "id,av_a,av_b,av_c,av_d,x_a,x_b,x_c,x_d,z,choice\n";
    std::vector<double> counts(4, 0.0);
    const int n = 1000;
    for (int r = 0; r < n; ++r) {
        const int c = pick(rng);
        counts[c] += 1;
        csv += std::to_string(r) + ",1,1,1,1,0,0,0,0,0," + std::to_string(c + 1) + "\n";
    }
    const auto data = simple_dataset({"a", "b", "c", "d"}, csv);
    const auto model = dcm::bind(
        dcm::parse_spec("alt a b c d\nparam asc_a fixed 0\nparam asc_b\nparam asc_c\nparam asc_d\n"
                        "U(a) = asc_a\nU(b) = asc_b\nU(c) = asc_c\nU(d) = asc_d\n"),
        data);
    const auto r = dcm::estimate(model);
    std::vector<double> fitted(4, 0.0);
    for (int row = 0; row < n; ++row) {
        const auto p = dcm::probabilities(model, r.estimates, row);
        for (int j = 0; j < 4; ++j) fitted[j] += p[j] / n;
    }
    double gap = 0;
    for (int j = 0; j < 4; ++j) gap = std::max(gap, std::abs(fitted[j] - counts[j] / n));
    return {gap, r.converged};
}

ScalingCheck cost_scaling_check() {
    const auto spec = load_spec("specs/best.dcm");
    const auto scaled_data = scale_columns(synth_data(), "cost_", 100.0);
    const auto base = dcm::estimate(dcm::bind(spec, synth_data()));
    const auto scaled = dcm::estimate(dcm::bind(spec, scaled_data));
    const double b = *base.estimate("b_cost"), bs = *scaled.estimate("b_cost");
    return {std::abs(scaled.loglik - base.loglik), std::abs(100 * bs - b) / std::abs(b), base.converged && scaled.converged};
}

std::vector<dcm::ProviderConfig> fixture_providers(int experiment, const std::string& root) {
    namespace fs = std::filesystem;
    const fs::path base = source_path(root);
    std::vector<dcm::ProviderConfig> out;
    for (const auto& prov : fs::directory_iterator(base)) {
        if (!prov.is_directory()) continue;
        for (const auto& model : fs::directory_iterator(prov.path()))
            if (fs::exists(model.path() / ("exp" + std::to_string(experiment) + ".json")))
                out.push_back(dcm::provider_config(prov.path().filename().string(), model.path().filename().string()));
    }
    std::sort(out.begin(), out.end(),
              [](const auto& a, const auto& b) { return std::tie(a.provider, a.model) < std::tie(b.provider, b.model); });
    return out;
}

const dcm::ExperimentResult& replayed(int experiment) {
    static std::map<int, dcm::ExperimentResult> cache;
    auto it = cache.find(experiment);
    if (it == cache.end()) {
        dcm::RunOptions o;
        o.fixtures = source_path("fixtures");
        it = cache
                 .emplace(experiment, dcm::run_experiment(dcm::ExperimentConfig::preset(experiment),
                                                          fixture_providers(experiment), synth_data(), o))
                 .first;
    }
    return it->second;
}

}  // namespace testing
