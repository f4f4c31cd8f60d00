#include "powvar/quadrature.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <map>
#include <mutex>

#include "powvar/summation.hpp"

namespace powvar {

namespace {

GaussRule makeLegendre(int n) {
    GaussRule rule;
    rule.x.resize(n);
    rule.w.resize(n);
    for (int i = 0; i < n / 2 + n % 2; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        rule.x[i] = -x;
        rule.x[n - 1 - i] = x;
        double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.w[i] = w;
        rule.w[n - 1 - i] = w;
    }
    return rule;
}

GaussRule makeJacobi(int n, double alpha, double beta) {
    if (n > 512)
        throw std::invalid_argument(
            "gaussJacobi: node count too large for the dense eigensolve");
    // Symmetric tridiagonal from the orthonormal Jacobi recurrence.
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(n, n);
    double ab = alpha + beta;
    T(0, 0) = (beta - alpha) / (ab + 2.0);
    for (int k = 1; k < n; ++k) {
        double d = (beta * beta - alpha * alpha) /
                   ((2.0 * k + ab) * (2.0 * k + ab + 2.0));
        T(k, k) = d;
        double b2;
        if (k == 1)
            b2 = 4.0 * (1.0 + alpha) * (1.0 + beta) /
                 ((ab + 2.0) * (ab + 2.0) * (ab + 3.0));
        else
            b2 = 4.0 * k * (k + alpha) * (k + beta) * (k + ab) /
                 ((2.0 * k + ab) * (2.0 * k + ab) * (2.0 * k + ab + 1.0) *
                  (2.0 * k + ab - 1.0));
        double b = std::sqrt(b2);
        T(k, k - 1) = b;
        T(k - 1, k) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    double mu0 = std::pow(2.0, ab + 1.0) * std::beta(alpha + 1.0, beta + 1.0);
    GaussRule rule;
    rule.x.resize(n);
    rule.w.resize(n);
    for (int i = 0; i < n; ++i) {
        rule.x[i] = es.eigenvalues()(i);
        double v0 = es.eigenvectors()(0, i);
        rule.w[i] = mu0 * v0 * v0;
    }
    return rule;
}

std::mutex g_cache_mutex;

}  // namespace

const GaussRule& gaussLegendre(int n) {
    static std::map<int, GaussRule> cache;
    std::lock_guard<std::mutex> lock(g_cache_mutex);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, makeLegendre(n)).first;
    return it->second;
}

const GaussRule& gaussJacobi(int n, double alpha, double beta) {
    static std::map<std::tuple<int, double, double>, GaussRule> cache;
    std::lock_guard<std::mutex> lock(g_cache_mutex);
    auto key = std::make_tuple(n, alpha, beta);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, makeJacobi(n, alpha, beta)).first;
    return it->second;
}

double integrateGL(const Integrand& f, double a, double b, int nodes) {
    if (!(b > a)) return 0.0;
    const GaussRule& rule = gaussLegendre(nodes);
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    Accumulator acc;
    for (std::size_t i = 0; i < rule.x.size(); ++i)
        acc.add(rule.w[i] * f(mid + half * rule.x[i]));
    return half * acc.value();
}

double integratePowerLeft(const Integrand& f, double a, double b, double beta,
                          int nodes) {
    if (!(b > a)) return 0.0;
    if (beta <= -1.0)
        throw std::domain_error("integratePowerLeft: non-integrable exponent");
    const GaussRule& rule = gaussJacobi(nodes, 0.0, beta);
    double half = 0.5 * (b - a);
    Accumulator acc;
    for (std::size_t i = 0; i < rule.x.size(); ++i)
        acc.add(rule.w[i] * f(a + half * (1.0 + rule.x[i])));
    // (x-a)^beta = (half (1+xi))^beta; the Jacobi weight already holds
    // (1+xi)^beta, the half^beta scale comes out front with the half from dx.
    return std::pow(half, beta + 1.0) * acc.value();
}

namespace {

double panelPass(const Integrand& f, double a, double b, int nodes,
                 bool kink_left, bool kink_right) {
    if (!(b > a)) return 0.0;
    if (!kink_left && !kink_right) return integrateGL(f, a, b, nodes);
    if (kink_left && kink_right) {
        double mid = 0.5 * (a + b);
        return panelPass(f, a, mid, nodes, true, false) +
               panelPass(f, mid, b, nodes, false, true);
    }
    // Dyadic panels toward the flagged end. The integrand is bounded, so
    // the innermost stub contributes ~ width * sup|f| and 52 halvings put
    // it at the round-off floor.
    const int kLevels = 52;
    double width = b - a;
    Accumulator acc;
    if (kink_left) {
        double hi = b;
        for (int k = 1; k <= kLevels; ++k) {
            double lo = a + width * std::ldexp(1.0, -k);
            acc.add(integrateGL(f, lo, hi, nodes));
            hi = lo;
        }
        acc.add(integrateGL(f, a, hi, nodes));
    } else {
        double lo = a;
        for (int k = 1; k <= kLevels; ++k) {
            double hi = b - width * std::ldexp(1.0, -k);
            acc.add(integrateGL(f, lo, hi, nodes));
            lo = hi;
        }
        acc.add(integrateGL(f, lo, b, nodes));
    }
    return acc.value();
}

}  // namespace

double integrateAdaptive(const Integrand& f, double a, double b,
                         const QuadratureConfig& cfg, bool kink_left,
                         bool kink_right, double scale_hint) {
    if (!(b > a)) return 0.0;
    int nodes = cfg.nodes;
    double floor = std::max(std::abs(scale_hint), 1e-300);
    double prev = panelPass(f, a, b, nodes, kink_left, kink_right);
    for (int pass = 0; pass < cfg.max_refinements; ++pass) {
        nodes *= 2;
        double cur = panelPass(f, a, b, nodes, kink_left, kink_right);
        double scale = std::max({std::abs(cur), std::abs(prev), floor});
        if (std::abs(cur - prev) <= cfg.rel_tol * scale) return cur;
        prev = cur;
    }
    double last = panelPass(f, a, b, nodes * 2, kink_left, kink_right);
    double scale = std::max({std::abs(last), std::abs(prev), floor});
    if (std::abs(last - prev) <= cfg.rel_tol * scale) return last;
    throw QuadratureError("quadrature did not stabilize", last, prev);
}

}  // namespace powvar
