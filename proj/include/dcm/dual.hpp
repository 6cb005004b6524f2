#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace dcm {

/// Forward-mode dual number carrying a value and a dense gradient.
///
/// The compound-assignment helpers reuse the existing gradient storage, so an
/// evaluator that keeps a stack of Duals alive runs without allocating once
/// every slot has reached full size.
class Dual {
public:
    double v = 0;
    std::vector<double> d;

    Dual() = default;
    explicit Dual(std::size_t n, double value = 0) : v(value), d(n, 0.0) {}

    static Dual variable(std::size_t n, std::size_t dir, double value) {
        Dual x(n, value);
        x.d[dir] = 1.0;
        return x;
    }

    std::size_t size() const { return d.size(); }

    void set_constant(std::size_t n, double value) {
        v = value;
        d.assign(n, 0.0);
    }

    Dual& operator+=(const Dual& b) {
        v += b.v;
        for (std::size_t i = 0; i < d.size(); ++i) d[i] += b.d[i];
        return *this;
    }
    Dual& operator-=(const Dual& b) {
        v -= b.v;
        for (std::size_t i = 0; i < d.size(); ++i) d[i] -= b.d[i];
        return *this;
    }
    // (ab)' = a'b + ab'
    Dual& operator*=(const Dual& b) {
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = d[i] * b.v + v * b.d[i];
        v *= b.v;
        return *this;
    }
    // (a/b)' = (a' - (a/b) b') / b
    Dual& operator/=(const Dual& b) {
        const double q = v / b.v;
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = (d[i] - q * b.d[i]) / b.v;
        v = q;
        return *this;
    }

    /// Applies f with f(v) = value and f'(v) = slope, in place.
    Dual& chain(double value, double slope) {
        v = value;
        for (auto& x : d) x *= slope;
        return *this;
    }

    Dual& negate() { return chain(-v, -1.0); }
    Dual& log_inplace() { return chain(std::log(v), 1.0 / v); }
    Dual& exp_inplace() {
        const double e = std::exp(v);
        return chain(e, e);
    }
    Dual& sqrt_inplace() {
        const double s = std::sqrt(v);
        return chain(s, 0.5 / s);
    }
    Dual& pow_inplace(double k) {
        const double p = std::pow(v, k);
        return chain(p, k == 0 ? 0.0 : k * std::pow(v, k - 1));
    }

    /// Box-Cox transform (x^λ - 1)/λ of *this with shape `lambda`, in place.
    /// Uses a series in λ·ln x near zero so value and gradient stay accurate.
    Dual& boxcox_inplace(const Dual& lambda) {
        const double x = v, lam = lambda.v;
        const double L = std::log(x);
        const double z = lam * L;
        double f, df_dlam;
        if (std::abs(z) < 1e-3) {
            f = L * (1 + z / 2 + z * z / 6 + z * z * z / 24);
            df_dlam = L * L * (0.5 + z / 3 + z * z / 8 + z * z * z / 30);
        } else {
            f = std::expm1(z) / lam;
            df_dlam = (L * std::exp(z) * lam - std::expm1(z)) / (lam * lam);
        }
        const double df_dx = std::exp(z) / x;  // x^(λ-1)
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = df_dx * d[i] + df_dlam * lambda.d[i];
        v = f;
        return *this;
    }
};

inline Dual operator+(Dual a, const Dual& b) { return a += b; }
inline Dual operator-(Dual a, const Dual& b) { return a -= b; }
inline Dual operator*(Dual a, const Dual& b) { return a *= b; }
inline Dual operator/(Dual a, const Dual& b) { return a /= b; }
inline Dual operator-(Dual a) { return a.negate(); }
inline Dual log(Dual a) { return a.log_inplace(); }
inline Dual exp(Dual a) { return a.exp_inplace(); }
inline Dual sqrt(Dual a) { return a.sqrt_inplace(); }
inline Dual pow(Dual a, double k) { return a.pow_inplace(k); }
inline Dual boxcox(Dual a, const Dual& lambda) { return a.boxcox_inplace(lambda); }

}  // namespace dcm
