#include "dcm/mnl.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "dcm/error.hpp"

namespace dcm {

namespace {

void require_finite(double v, const BoundModel& m, std::size_t row, std::size_t alt) {
    if (!std::isfinite(v))
        throw NonFiniteUtility("utility of '" + m.data().alternatives()[alt] + "' is not finite on row " +
                               std::to_string(row + 1));
}

struct Workspace {
    std::vector<double> slots;
    std::vector<double> stack;
    std::vector<Dual> dstack;
    std::vector<double> v;
    std::vector<Dual> dv;
};

void row_utilities(const BoundModel& m, std::size_t r, Workspace& w) {
    const auto& data = m.data();
    const auto row = data.row_values(r);
    w.v.assign(data.n_alternatives(), 0.0);
    for (std::size_t j = 0; j < data.n_alternatives(); ++j) {
        if (!data.available(r, j)) continue;
        if (const auto* p = m.program(j)) w.v[j] = p->eval(row, w.slots, w.stack);
        require_finite(w.v[j], m, r, j);
    }
}

double max_available(const Dataset& data, std::size_t r, const std::vector<double>& v) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < v.size(); ++j)
        if (data.available(r, j)) mx = std::max(mx, v[j]);
    return mx;
}

}  // namespace

std::vector<double> utilities(const BoundModel& model, std::span<const double> theta, std::size_t row) {
    Workspace w;
    model.expand(theta, w.slots);
    row_utilities(model, row, w);
    return w.v;
}

std::vector<double> probabilities(const BoundModel& model, std::span<const double> theta, std::size_t row) {
    const auto& data = model.data();
    auto v = utilities(model, theta, row);
    const double m = max_available(data, row, v);
    double sum = 0;
    for (std::size_t j = 0; j < v.size(); ++j) {
        v[j] = data.available(row, j) ? std::exp(v[j] - m) : 0.0;
        sum += v[j];
    }
    for (auto& p : v) p /= sum;
    return v;
}

double log_likelihood(const BoundModel& model, std::span<const double> theta) {
    const auto& data = model.data();
    Workspace w;
    model.expand(theta, w.slots);
    double ll = 0;
    for (std::size_t r = 0; r < data.n_obs(); ++r) {
        row_utilities(model, r, w);
        const double m = max_available(data, r, w.v);
        double sum = 0;
        for (std::size_t j = 0; j < w.v.size(); ++j)
            if (data.available(r, j)) sum += std::exp(w.v[j] - m);
        ll += w.v[data.choice(r)] - m - std::log(sum);
    }
    return ll;
}

double loglik_and_gradient(const BoundModel& model, std::span<const double> theta, std::vector<double>& grad) {
    const auto& data = model.data();
    const std::size_t n = model.n_free();
    const std::size_t J = data.n_alternatives();
    const auto dir = model.slot_directions();
    Workspace w;
    model.expand(theta, w.slots);
    w.v.resize(J);
    w.dv.assign(J, Dual(n));
    grad.assign(n, 0.0);
    std::vector<double> p(J);
    double ll = 0;
    for (std::size_t r = 0; r < data.n_obs(); ++r) {
        const auto row = data.row_values(r);
        for (std::size_t j = 0; j < J; ++j) {
            w.dv[j].set_constant(n, 0.0);
            if (!data.available(r, j)) continue;
            if (const auto* prog = model.program(j)) {
                prog->eval_dual(row, w.slots, dir, n, w.dstack);
                std::swap(w.dv[j], w.dstack[0]);
            }
            w.v[j] = w.dv[j].v;
            require_finite(w.v[j], model, r, j);
        }
        const double m = max_available(data, r, w.v);
        double sum = 0;
        for (std::size_t j = 0; j < J; ++j) {
            p[j] = data.available(r, j) ? std::exp(w.v[j] - m) : 0.0;
            sum += p[j];
        }
        const std::size_t c = data.choice(r);
        ll += w.v[c] - m - std::log(sum);
        // d ln p_c = dV_c - sum_k p_k dV_k
        for (std::size_t j = 0; j < J; ++j) {
            if (p[j] == 0) continue;
            const double pj = p[j] / sum;
            for (std::size_t i = 0; i < n; ++i) grad[i] -= pj * w.dv[j].d[i];
        }
        for (std::size_t i = 0; i < n; ++i) grad[i] += w.dv[c].d[i];
    }
    return ll;
}

std::vector<double> gradient(const BoundModel& model, std::span<const double> theta) {
    std::vector<double> g;
    loglik_and_gradient(model, theta, g);
    return g;
}

double null_loglik(const Dataset& data) {
    std::map<std::size_t, std::size_t> rows_with;
    for (std::size_t r = 0; r < data.n_obs(); ++r) ++rows_with[data.n_available(r)];
    double ll = 0;
    for (const auto& [n_av, count] : rows_with) ll -= static_cast<double>(count) * std::log(static_cast<double>(n_av));
    return ll;
}

}  // namespace dcm
