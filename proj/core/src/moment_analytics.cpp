#include "powvar/moment_analytics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "powvar/summation.hpp"

namespace powvar {

MomentExpansion hermite_expand(int m) {
    if (m < 1 || m % 2 == 0 || m > 15)
        throw std::domain_error("hermite_expand: m must be odd, 1 <= m <= 15");
    MomentExpansion e;
    e.m = m;
    int terms = (m - 1) / 2 + 1;
    e.a.resize(terms);
    e.c.resize(terms);
    for (int j = 0; j < terms; ++j) {
        int k = 2 * j + 1;        // Hermite order
        int pairs = (m - k) / 2;  // contracted pairs in the monomial
        // x^m = sum_k m! / (k! 2^p p!) He_k(x), p = (m-k)/2
        Rational a = factorial(m) /
                     (factorial(k) * Rational(1LL << pairs) * factorial(pairs));
        e.a[j] = a;
        e.c[j] = factorial(k) * a * a;
    }
    return e;
}

std::vector<Rational> hermitePolynomial(int n) {
    // He_{n+1} = x He_n - n He_{n-1}, coefficients by power of x.
    std::vector<Rational> prev{Rational(1)};           // He_0
    if (n == 0) return prev;
    std::vector<Rational> cur{Rational(0), Rational(1)};  // He_1
    for (int k = 1; k < n; ++k) {
        std::vector<Rational> next(k + 2, Rational(0));
        for (std::size_t p = 0; p < cur.size(); ++p) next[p + 1] = cur[p];
        for (std::size_t p = 0; p < prev.size(); ++p)
            next[p] -= Rational(k) * prev[p];
        prev = std::move(cur);
        cur = std::move(next);
    }
    return cur;
}

double isserlis_joint_moment(int m, double rho, double varY, double varZ) {
    if (m < 1 || m % 2 == 0)
        throw std::domain_error("isserlis_joint_moment: m must be odd");
    if (varY < 0.0 || varZ < 0.0)
        throw std::domain_error("isserlis_joint_moment: negative variance");
    if (std::abs(rho) > std::sqrt(varY * varZ) + 1e-12)
        throw std::domain_error(
            "isserlis_joint_moment: |rho| exceeds sqrt(varY varZ)");
    MomentExpansion e = hermite_expand(m);
    Accumulator acc;
    for (std::size_t j = 0; j < e.c.size(); ++j) {
        int pairs = (m - (2 * (int)j + 1)) / 2;
        acc.add(e.c[j].toDouble() * std::pow(rho, 2.0 * j + 1.0) *
                std::pow(varY * varZ, pairs));
    }
    return acc.value();
}

Rational isserlisCoefficient(int m, const Rational& rho, const Rational& varY,
                             const Rational& varZ) {
    MomentExpansion e = hermite_expand(m);
    Rational sum(0);
    for (std::size_t j = 0; j < e.c.size(); ++j) {
        int pairs = (m - (2 * (int)j + 1)) / 2;
        sum += e.c[j] * rho.pow(2 * (int)j + 1) * (varY * varZ).pow(pairs);
    }
    return sum;
}

namespace {

// Explicit walk over all perfect pairings of indices {0..2m-1} (first m
// are Y's). Each leaf contributes the product of pair covariances.
void enumeratePairings(std::vector<bool>& used, int m, const Rational& rho,
                       const Rational& varY, const Rational& varZ,
                       const Rational& prefix, Rational& total) {
    int n = (int)used.size();
    int first = -1;
    for (int i = 0; i < n; ++i)
        if (!used[i]) { first = i; break; }
    if (first < 0) {
        total += prefix;
        return;
    }
    used[first] = true;
    for (int j = first + 1; j < n; ++j) {
        if (used[j]) continue;
        const Rational& cov =
            (first < m) ? (j < m ? varY : rho) : varZ;
        used[j] = true;
        enumeratePairings(used, m, rho, varY, varZ, prefix * cov, total);
        used[j] = false;
    }
    used[first] = false;
}

}  // namespace

Rational isserlisEnumeration(int m, const Rational& rho, const Rational& varY,
                             const Rational& varZ) {
    if (m < 1 || m % 2 == 0 || m > 9)
        throw std::domain_error("isserlisEnumeration: m must be odd, <= 9");
    std::vector<bool> used(2 * m, false);
    Rational total(0);
    enumeratePairings(used, m, rho, varY, varZ, Rational(1), total);
    return total;
}

namespace {

double signedPow(double x, int n) {
    double r = 1.0;
    for (int i = 0; i < n; ++i) r *= x;
    return r;
}

}  // namespace

MsqBreakdown exact_msq_variation(const CovarianceModel& model, int m, double eps,
                                 double T, const QuadratureConfig& quad) {
    if (m < 3 || m % 2 == 0)
        throw std::domain_error("exact_msq_variation: m must be odd and >= 3");
    if (!(eps > 0.0 && T > 0.0))
        throw std::domain_error("exact_msq_variation: eps and T must be > 0");

    MomentExpansion e = hermite_expand(m);
    int terms = (m - 1) / 2 + 1;
    MsqBreakdown out;
    out.m = m;
    out.eps = eps;
    out.coeff.resize(terms);
    out.J_band.assign(terms, 0.0);
    out.J_off.assign(terms, 0.0);
    out.J.assign(terms, 0.0);
    for (int j = 0; j < terms; ++j) {
        int order = m - 2 * j;  // Theta exponent; Hermite index (order-1)/2
        out.coeff[j] = e.c[(order - 1) / 2].toDouble();
    }

    double band_hi = std::min(eps, T);
    if (model.stationaryIncrements()) {
        // One-dimensional reduction: both factors depend on u = t - s only,
        // and Var[X(t+eps)-X(t)] = delta^2(eps).
        double var_inc = model.delta2Univ(eps);
        for (int j = 0; j < terms; ++j) {
            int order = m - 2 * j;
            auto g = [&](double u) {
                return (T - u) * signedPow(theta_eps(model, 0.0, u, eps), order);
            };
            double pref =
                2.0 * out.coeff[j] * std::pow(var_inc, 2.0 * j) / (eps * eps);
            double band = integrateAdaptive(g, 0.0, band_hi, quad, true, true);
            out.J_band[j] = pref * band;
            out.J_off[j] =
                eps < T ? pref * integrateAdaptive(g, eps, T, quad, true, false,
                                                   std::abs(band))
                        : 0.0;
            out.J[j] = out.J_band[j] + out.J_off[j];
        }
    } else {
        // Full 2-D tensor route in (u, t) coordinates over the triangle
        // s < t (factor 2 by symmetry), inner Gauss in t, outer adaptive
        // in u with the split at u = eps.
        QuadratureConfig outer = quad;
        outer.nodes = std::max(8, quad.nodes / 4);
        outer.rel_tol = std::max(quad.rel_tol, 1e-6);
        int inner_nodes = quad.nodes;
        for (int j = 0; j < terms; ++j) {
            int order = m - 2 * j;
            auto inner = [&](double u) {
                auto f = [&](double t) {
                    double s = t - u;
                    double th = theta_eps(model, s, t, eps);
                    double v = signedPow(th, order);
                    if (j > 0) {
                        double vt = model.delta2(t, t + eps);
                        double vs = model.delta2(s, s + eps);
                        v *= std::pow(vt * vs, j);
                    }
                    return v;
                };
                return integrateGL(f, u, T, inner_nodes);
            };
            double pref = 2.0 * out.coeff[j] / (eps * eps);
            double band = integrateAdaptive(inner, 0.0, band_hi, outer, true, true);
            out.J_band[j] = pref * band;
            out.J_off[j] =
                eps < T ? pref * integrateAdaptive(inner, eps, T, outer, true,
                                                   false, std::abs(band))
                        : 0.0;
            out.J[j] = out.J_band[j] + out.J_off[j];
        }
    }
    Accumulator acc;
    for (int j = 0; j < terms; ++j) acc.add(out.J[j]);
    out.total = acc.value();
    return out;
}

namespace {

// int int over [a,b]^2 of the fBm covariance, closed form.
double fbmVarSquare(double H, double a, double b) {
    double w = b - a;
    double p1 = 2.0 * H + 1.0, p2 = 2.0 * H + 2.0;
    return w * (std::pow(b, p1) - std::pow(a, p1)) / p1 -
           std::pow(w, p2) / (p1 * p2);
}

// Cov( int_0^eps X, int_T^{T+eps} X ) for fBm, closed form.
double fbmCovBlocks(double H, double eps, double T) {
    double p1 = 2.0 * H + 1.0, p2 = 2.0 * H + 2.0;
    double onDiag =
        eps * (std::pow(eps, p1) - 0.0) / p1;  // int_0^eps s^{2H} ds * eps
    double farDiag = eps * (std::pow(T + eps, p1) - std::pow(T, p1)) / p1;
    double cross = (std::pow(T + eps, p2) - 2.0 * std::pow(T, p2) +
                    std::pow(T - eps, p2)) /
                   (p1 * p2);
    return 0.5 * (onDiag + farDiag - cross);
}

}  // namespace

ChaosVariances chaos_variances_fbm(double hurst, double eps, double T,
                                   const QuadratureConfig& quad) {
    if (!(hurst > 0.0 && hurst < 1.0))
        throw std::domain_error("chaos_variances_fbm: hurst outside (0,1)");
    ChaosVariances out;
    double V = fbmVarSquare(hurst, T, T + eps) + fbmVarSquare(hurst, 0.0, eps) -
               2.0 * fbmCovBlocks(hurst, eps, T);
    out.varI1 = 9.0 * std::pow(eps, 4.0 * hurst - 2.0) * V;

    CovarianceModel model = build_model(KernelSpec::fbm(hurst, T), quad);
    auto g = [&](double u) {
        double th = theta_eps(model, 0.0, u, eps);
        return (T - u) * th * th * th;
    };
    double band = integrateAdaptive(g, 0.0, std::min(eps, T), quad, true, true);
    double off = eps < T ? integrateAdaptive(g, eps, T, quad, true, false,
                                             std::abs(band))
                         : 0.0;
    out.varI3 = 12.0 / (eps * eps) * (band + off);
    return out;
}

RateFit rate_fit(const std::vector<double>& eps_ladder,
                 const std::vector<double>& values) {
    if (eps_ladder.size() != values.size())
        throw std::invalid_argument("rate_fit: ladder/value size mismatch");
    if (eps_ladder.size() < 4)
        throw std::invalid_argument("rate_fit: need at least 4 ladder points");
    std::size_t n = values.size();
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(eps_ladder[i] > 0.0))
            throw std::domain_error("rate_fit: non-positive eps");
        if (!(values[i] > 0.0))
            throw std::domain_error("rate_fit: non-positive value");
        x[i] = std::log(eps_ladder[i]);
        y[i] = std::log(values[i]);
    }
    double xm = 0.0, ym = 0.0;
    for (std::size_t i = 0; i < n; ++i) { xm += x[i]; ym += y[i]; }
    xm /= n;
    ym /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - xm) * (x[i] - xm);
        sxy += (x[i] - xm) * (y[i] - ym);
        syy += (y[i] - ym) * (y[i] - ym);
    }
    RateFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = ym - fit.slope * xm;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double r = y[i] - (fit.intercept + fit.slope * x[i]);
        ss_res += r * r;
    }
    fit.r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
    return fit;
}

}  // namespace powvar
