#include "powvar/covariance.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "powvar/summation.hpp"

namespace powvar {

namespace {

double fbmQ(double H, double s, double t) {
    return 0.5 * (std::pow(s, 2.0 * H) + std::pow(t, 2.0 * H) -
                  std::pow(std::abs(t - s), 2.0 * H));
}

}  // namespace

double CovarianceModel::kernelProductIntegral(double s, double t, int nodes) const {
    // s <= t, s > 0. Substitution w = s - u turns the integral into
    //   int_0^s  w^q * F(w) dw,   F(w) = G(t, s-w) G(s, s-w) / w^q,
    // singular only at w = 0.
    double q = spec_.singularityExponent();
    double delta = t - s;

    const KernelSpec* shape = spec_.family == KernelFamily::ScaledMartingale
                                  ? spec_.base.get()
                                  : &spec_;
    auto smooth = [&](double w) -> double {
        double f;
        if (shape->family == KernelFamily::RLfBm) {
            f = std::pow(delta + w, q);
        } else {
            // sqrt(g'(w) g'(delta+w)) / w^q
            f = std::sqrt(shape->gamma2.derivative(w) *
                          shape->gamma2.derivative(delta + w)) /
                std::pow(w, q);
        }
        if (spec_.family == KernelFamily::ScaledMartingale) {
            double g = spec_.gamma(s - w);
            f *= g * g;
        }
        return f;
    };

    // int_0^s w^p F(w) dw via a Jacobi-weight stub at 0 (where F is flat to
    // ~2^-30 relative) plus dyadic Gauss panels doubling away from it.
    // Panel widths track w, so boundary layers at w ~ delta are resolved
    // without large node counts, log factors included.
    auto singularIntegral = [&](double p, const std::function<double(double)>& F) {
        double stub = s * std::ldexp(1.0, -30);
        Accumulator acc;
        acc.add(integratePowerLeft(F, 0.0, stub, p, std::min(nodes, 48)));
        int gl = std::max(12, std::min(nodes, 64));
        double lo = stub;
        while (lo < s) {
            double hi = std::min(s, 2.0 * lo);
            acc.add(integrateGL([&](double w) { return std::pow(w, p) * F(w); },
                                lo, hi, gl));
            lo = hi;
        }
        return acc.value();
    };

    if (delta == 0.0) {
        // Diagonal: weight w^{2q}, smooth factor per family.
        if (spec_.family == KernelFamily::RLfBm)
            return std::pow(s, 2.0 * spec_.hurst) / (2.0 * spec_.hurst);
        if (spec_.family == KernelFamily::VolterraConcave)
            return spec_.gamma2.value(s);  // int_0^s g'(w) dw, exactly
        auto diag = [&](double w) {
            double base = shape->family == KernelFamily::RLfBm
                              ? 1.0
                              : shape->gamma2.derivative(w) / std::pow(w, 2.0 * q);
            double g = spec_.gamma(s - w);
            return base * g * g;
        };
        return singularIntegral(2.0 * q, diag);
    }
    return singularIntegral(q, smooth);
}

double CovarianceModel::Q(double s, double t) const {
    if (spec_.family == KernelFamily::FbmExact)
        return fbmQ(spec_.hurst, std::abs(s), std::abs(t));
    double a = std::min(s, t), b = std::max(s, t);
    if (a <= 0.0) return 0.0;
    return kernelProductIntegral(a, b, panel_nodes_);
}

double CovarianceModel::delta2(double s, double t) const {
    if (stationary_) return delta2Univ(std::abs(t - s));
    Accumulator acc;
    acc.add(Q(s, s));
    acc.add(Q(t, t));
    acc.add(-2.0 * Q(s, t));
    double v = acc.value();
    return v;
}

double CovarianceModel::delta2Univ(double r) const {
    r = std::abs(r);
    switch (spec_.family) {
        case KernelFamily::FbmExact:
            return std::pow(r, 2.0 * spec_.hurst);
        case KernelFamily::VolterraConcave:
            return 2.0 * spec_.gamma2.value(r);
        default: {
            // sup_s delta^2(s, s+r): the running integral grows with s, so
            // the sup sits at the right edge of the horizon.
            if (r == 0.0) return 0.0;
            double s = std::max(spec_.horizon - r, 0.0);
            if (s == 0.0) return Q(r, r);
            Accumulator acc;
            acc.add(Q(s, s));
            acc.add(Q(s + r, s + r));
            acc.add(-2.0 * Q(s, s + r));
            return acc.value();
        }
    }
}

CovarianceModel build_model(const KernelSpec& spec, const QuadratureConfig& quad) {
    spec.validate();
    CovarianceModel m;
    m.spec_ = spec;
    m.quad_ = quad;
    m.stationary_ = spec.family == KernelFamily::FbmExact;
    if (m.stationary_) return m;

    // Freeze the panel node count: double until probe covariances move by
    // less than rel_tol, spanning diagonal-adjacent and well-separated
    // pairs.
    double T = spec.horizon;
    const double probes[][2] = {{0.25 * T, 0.75 * T},
                                {0.5 * T, 0.5 * T + 1e-3 * T},
                                {0.9 * T, T},
                                {1e-3 * T, 0.5 * T},
                                {T, T}};
    int nodes = std::max(12, quad.nodes / 2);
    m.panel_nodes_ = nodes;
    double worst_prev = 0.0, worst_cur = 0.0;
    for (int pass = 0;; ++pass) {
        worst_cur = 0.0;
        for (auto& p : probes) {
            double q1 = m.kernelProductIntegral(p[0], p[1], nodes);
            double q2 = m.kernelProductIntegral(p[0], p[1], 2 * nodes);
            double scale = std::max({std::abs(q1), std::abs(q2), 1e-300});
            worst_cur = std::max(worst_cur, std::abs(q2 - q1) / scale);
        }
        if (worst_cur <= quad.rel_tol) break;
        if (pass >= quad.max_refinements)
            throw QuadratureError("covariance quadrature did not stabilize",
                                  worst_cur, worst_prev);
        worst_prev = worst_cur;
        nodes *= 2;
    }
    m.panel_nodes_ = 2 * nodes;  // keep the finer, already-validated rule
    return m;
}

double theta_eps(const CovarianceModel& model, double s, double t, double eps) {
    if (model.stationaryIncrements()) {
        double u = std::abs(t - s);
        Accumulator acc;
        acc.add(model.delta2Univ(u + eps));
        acc.add(model.delta2Univ(std::abs(u - eps)));
        acc.add(-model.delta2Univ(u));
        acc.add(-model.delta2Univ(u));
        return 0.5 * acc.value();
    }
    Accumulator acc;
    acc.add(-model.delta2(t + eps, s + eps));
    acc.add(model.delta2(t, s + eps));
    acc.add(model.delta2(s, t + eps));
    acc.add(-model.delta2(s, t));
    return 0.5 * acc.value();
}

MuMassResult mu_offdiagonal_mass(const CovarianceModel& model, double eps,
                                 int grid_n) {
    if (!(eps > 0.0)) throw std::domain_error("mu_offdiagonal_mass: eps <= 0");
    if (grid_n < 64) throw std::domain_error("mu_offdiagonal_mass: grid_n < 64");
    double T = model.horizon();

    auto massAt = [&](int n) {
        double h = T / n;
        // delta^2 on the corner lattice, then total variation of the cell
        // increments over cells fully inside {s <= t - eps}.
        std::vector<double> lattice((n + 1) * (n + 1));
        for (int j = 0; j <= n; ++j)
            for (int i = 0; i <= j; ++i) {
                double v = model.delta2(i * h, j * h);
                lattice[i * (n + 1) + j] = v;
                lattice[j * (n + 1) + i] = v;
            }
        Accumulator acc;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double s_hi = (i + 1) * h, t_lo = j * h;
                if (s_hi > t_lo - eps) continue;
                double inc = lattice[(i + 1) * (n + 1) + (j + 1)] -
                             lattice[(i + 1) * (n + 1) + j] -
                             lattice[i * (n + 1) + (j + 1)] +
                             lattice[i * (n + 1) + j];
                acc.add(std::abs(inc));
            }
        return acc.value();
    };

    MuMassResult out;
    double prev = massAt(grid_n);
    int n = grid_n;
    for (int level = 0; level < 2; ++level) {
        n *= 2;
        double cur = massAt(n);
        out.previous = prev;
        out.mass = cur;
        out.grid_n = n;
        double scale = std::max({std::abs(cur), std::abs(prev), 1e-300});
        if (std::abs(cur - prev) <= 0.05 * scale) {
            out.converged = true;
            return out;
        }
        prev = cur;
    }
    out.converged = false;
    return out;
}

namespace {

std::vector<double> logSpaced(double lo, double hi, int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i)
        v[i] = lo * std::pow(hi / lo, double(i) / (n - 1));
    return v;
}

}  // namespace

std::vector<ConditionReport> check_conditions(const CovarianceModel& model,
                                              double a, double b, double c,
                                              double cprime, int probe_n) {
    if (!(a > 1.0)) throw std::invalid_argument("check_conditions: a must be > 1");
    if (!(b > 0.0 && b < 0.5))
        throw std::invalid_argument("check_conditions: b must lie in (0, 1/2)");
    if (!(c > 0.25)) throw std::invalid_argument("check_conditions: c must be > 1/4");
    if (!(cprime > 0.0)) throw std::invalid_argument("check_conditions: c' must be > 0");
    if (probe_n < 4) throw std::invalid_argument("check_conditions: probe_n < 4");

    double hi = std::min(1.0, model.horizon());
    double lo = hi * std::ldexp(1.0, -10);
    auto us = logSpaced(lo, hi, probe_n);

    std::vector<ConditionReport> reports;
    auto finalize = [&](ConditionReport& r, double scale) {
        r.holds = r.worst_margin > -1e-12 * std::max(scale, 1.0);
        reports.push_back(r);
    };

    {  // (i)  c delta^2(u) <= Q_u
        ConditionReport r;
        r.condition = "i";
        r.params = {{"c", c}};
        r.worst_margin = INFINITY;
        double scale = 0.0;
        for (double u : us) {
            double qu = model.Q(u, u);
            double d2 = model.delta2Univ(u);
            r.worst_margin = std::min(r.worst_margin, qu - c * d2);
            scale = std::max(scale, std::abs(qu));
            ++r.probe_count;
        }
        finalize(r, scale);
    }
    {  // (ii)  c' delta^2(u) delta^2(v-u) <= Q_u Q_v - Q(u,v)^2
        ConditionReport r;
        r.condition = "ii";
        r.params = {{"cprime", cprime}};
        r.worst_margin = INFINITY;
        double scale = 0.0;
        for (int i = 0; i < probe_n; ++i)
            for (int j = i + 1; j < probe_n; ++j) {
                double u = us[i], v = us[j];
                double lhs = cprime * model.delta2Univ(u) * model.delta2Univ(v - u);
                double quv = model.Q(u, v);
                double rhs = model.Q(u, u) * model.Q(v, v) - quv * quv;
                r.worst_margin = std::min(r.worst_margin, rhs - lhs);
                scale = std::max(scale, std::abs(rhs));
                ++r.probe_count;
            }
        finalize(r, scale);
    }
    {  // (iii) secant slope of delta between u and au vs b * slope from 0
        ConditionReport r;
        r.condition = "iii";
        r.params = {{"a", a}, {"b", b}};
        r.worst_margin = INFINITY;
        double scale = 0.0;
        for (double u : us) {
            if (a * u > model.horizon()) continue;
            double du = std::sqrt(std::max(model.delta2Univ(u), 0.0));
            double dau = std::sqrt(std::max(model.delta2Univ(a * u), 0.0));
            double lhs = (dau - du) / ((a - 1.0) * u);
            double rhs = b * du / u;
            r.worst_margin = std::min(r.worst_margin, rhs - lhs);
            scale = std::max(scale, std::abs(rhs));
            ++r.probe_count;
        }
        finalize(r, scale);
    }
    return reports;
}

ConditionReport check_concavity(const std::function<double(double)>& delta2_univ,
                                double r_lo, double r_hi, int probe_n) {
    if (!(r_lo > 0.0 && r_hi > r_lo))
        throw std::invalid_argument("check_concavity: need 0 < r_lo < r_hi");
    if (probe_n < 4) throw std::invalid_argument("check_concavity: probe_n < 4");

    ConditionReport r;
    r.condition = "concavity";
    r.params = {{"r_lo", r_lo}, {"r_hi", r_hi}};
    double h = (r_hi - r_lo) / (probe_n - 1);
    std::vector<double> g(probe_n);
    double scale = 0.0;
    for (int i = 0; i < probe_n; ++i) {
        g[i] = delta2_univ(r_lo + i * h);
        scale = std::max(scale, std::abs(g[i]));
    }
    r.probe_count = probe_n;
    double tol = 1e-9 * std::max(scale, 1e-300);
    double margin = INFINITY;
    for (int i = 0; i + 1 < probe_n; ++i)
        margin = std::min(margin, (g[i + 1] - g[i]) / h);  // increasing
    for (int i = 0; i + 2 < probe_n; ++i) {
        double second = g[i + 2] - 2.0 * g[i + 1] + g[i];  // concave: <= 0
        margin = std::min(margin, (tol - second) / (h * h));
    }
    r.worst_margin = margin;
    r.holds = margin > 0.0;
    return r;
}

std::string ConditionReport::to_json() const {
    std::ostringstream os;
    os.precision(17);
    os << "{\"condition\":\"" << condition << "\",\"params\":{";
    bool first = true;
    for (auto& [k, v] : params) {
        if (!first) os << ",";
        first = false;
        os << "\"" << k << "\":" << v;
    }
    os << "},\"worst_margin\":" << worst_margin
       << ",\"holds\":" << (holds ? "true" : "false")
       << ",\"probe_count\":" << probe_count << "}";
    return os.str();
}

}  // namespace powvar
