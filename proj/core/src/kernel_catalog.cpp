#include "powvar/kernel_catalog.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>
#include <vector>

#include "powvar/rng.hpp"

namespace powvar {

std::string to_string(KernelFamily f) {
    switch (f) {
        case KernelFamily::FbmExact: return "fbm_exact";
        case KernelFamily::RLfBm: return "rl_fbm";
        case KernelFamily::VolterraConcave: return "volterra_concave";
        case KernelFamily::ScaledMartingale: return "scaled_martingale";
    }
    return "?";
}

double Gamma2Spec::value(double r) const {
    if (r <= 0.0) return 0.0;
    if (kind == Kind::Power) return std::pow(r, 2.0 * hurst);
    double L = std::log(1.0 / r);
    return std::pow(r, 1.0 / (2.0 * m)) / L;
}

double Gamma2Spec::derivative(double r) const {
    if (r <= 0.0) throw std::domain_error("Gamma2Spec::derivative: r <= 0");
    if (kind == Kind::Power) return 2.0 * hurst * std::pow(r, 2.0 * hurst - 1.0);
    double a = 1.0 / (2.0 * m);
    double L = std::log(1.0 / r);
    return std::pow(r, a - 1.0) * (a * L + 1.0) / (L * L);
}

namespace {

// E[sin^{2m}(Z)] for Z ~ N(0, t), by the finite cosine expansion of
// sin^{2m} and E[cos(2jZ)] = exp(-2 j^2 t).
double sinEvenMoment(int m, double t) {
    auto binom = [](int n, int k) {
        double v = 1.0;
        for (int i = 1; i <= k; ++i) v = v * (n - k + i) / i;
        return v;
    };
    double sum = binom(2 * m, m);
    for (int j = 1; j <= m; ++j) {
        double sign = (j % 2 == 0) ? 1.0 : -1.0;
        sum += 2.0 * sign * binom(2 * m, m - j) * std::exp(-2.0 * j * j * t);
    }
    return sum * std::pow(4.0, -m);
}

}  // namespace

double GammaScale::operator()(double t) const {
    switch (kind) {
        case Kind::Constant: return c;
        case Kind::SqrtLinear: return c * std::sqrt(t);
        case Kind::SinMoment:
            return std::pow(sinEvenMoment(m, t), 1.0 / (2.0 * m));
    }
    return c;
}

KernelSpec KernelSpec::fbm(double hurst, double horizon) {
    KernelSpec s;
    s.family = KernelFamily::FbmExact;
    s.hurst = hurst;
    s.horizon = horizon;
    s.validate();
    return s;
}

KernelSpec KernelSpec::rlfbm(double hurst, double horizon) {
    KernelSpec s;
    s.family = KernelFamily::RLfBm;
    s.hurst = hurst;
    s.horizon = horizon;
    s.validate();
    return s;
}

KernelSpec KernelSpec::volterraPower(double hurst, double horizon) {
    KernelSpec s;
    s.family = KernelFamily::VolterraConcave;
    s.hurst = hurst;
    s.horizon = horizon;
    s.gamma2 = Gamma2Spec{Gamma2Spec::Kind::Power, hurst, 3};
    s.validate();
    return s;
}

KernelSpec KernelSpec::volterraPowerLog(int m, double horizon) {
    KernelSpec s;
    s.family = KernelFamily::VolterraConcave;
    s.hurst = 1.0 / (4.0 * m);  // Hoelder scale of gamma = sqrt(gamma^2)
    s.horizon = horizon;
    s.gamma2 = Gamma2Spec{Gamma2Spec::Kind::PowerLog, 0.0, m};
    s.validate();
    return s;
}

KernelSpec KernelSpec::scaled(const KernelSpec& base, const GammaScale& gamma) {
    if (!base.causal())
        throw std::invalid_argument("scaled kernel requires a causal base");
    KernelSpec s;
    s.family = KernelFamily::ScaledMartingale;
    s.hurst = base.hurst;
    s.horizon = base.horizon;
    s.base = std::make_shared<KernelSpec>(base);
    s.gamma = gamma;
    s.validate();
    return s;
}

void KernelSpec::validate() const {
    if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be > 0");
    if (family != KernelFamily::VolterraConcave &&
        !(hurst > 0.0 && hurst < 1.0))
        throw std::invalid_argument("hurst must lie strictly in (0,1)");
    if (family == KernelFamily::VolterraConcave) {
        // Increasing and concave on (0, horizon], with gamma^2(0+) = 0,
        // probed on a log-spaced grid. The left endpoint sits twelve
        // decades down because power-log shapes vanish only slowly.
        const int n = 96;
        std::vector<double> r(n), g(n);
        double lo = horizon * 1e-12;
        for (int i = 0; i < n; ++i) {
            r[i] = lo * std::pow(horizon / lo, double(i) / (n - 1));
            g[i] = gamma2.value(r[i]);
            if (!std::isfinite(g[i]))
                throw std::invalid_argument(
                    "gamma2 not finite at r=" + std::to_string(r[i]));
        }
        if (!(g[0] >= 0.0 && g[0] < 0.05 * g[n - 1]))
            throw std::invalid_argument("gamma2 does not vanish at 0+");
        for (int i = 0; i + 1 < n; ++i)
            if (!(g[i + 1] > g[i]))
                throw std::invalid_argument(
                    "gamma2 not increasing near r=" + std::to_string(r[i]));
        // Concavity via the slope of chords: must be non-increasing.
        double tol = 1e-9 * g[n - 1];
        for (int i = 0; i + 2 < n; ++i) {
            double s01 = (g[i + 1] - g[i]) / (r[i + 1] - r[i]);
            double s12 = (g[i + 2] - g[i + 1]) / (r[i + 2] - r[i + 1]);
            if (s12 > s01 + tol)
                throw std::invalid_argument(
                    "gamma2 not concave near r=" + std::to_string(r[i + 1]));
        }
    }
    if (family == KernelFamily::ScaledMartingale) {
        if (!base) throw std::invalid_argument("scaled kernel without base");
        base->validate();
    }
}

double KernelSpec::singularityExponent() const {
    switch (family) {
        case KernelFamily::FbmExact:
            throw std::domain_error("FbmExact has no kernel representation");
        case KernelFamily::RLfBm:
            return hurst - 0.5;
        case KernelFamily::VolterraConcave:
            // G = sqrt((gamma^2)'), so half the derivative's exponent.
            return gamma2.kind == Gamma2Spec::Kind::Power
                       ? hurst - 0.5
                       : 0.5 * (1.0 / (2.0 * gamma2.m) - 1.0);
        case KernelFamily::ScaledMartingale:
            return base->singularityExponent();
    }
    return 0.0;
}

std::uint64_t KernelSpec::digest() const {
    auto mix = [](std::uint64_t h, const void* data, std::size_t len) {
        const unsigned char* p = (const unsigned char*)data;
        for (std::size_t i = 0; i < len; ++i) {
            h ^= p[i];
            h *= 0x100000001B3ULL;
        }
        return h;
    };
    std::uint64_t h = 0xCBF29CE484222325ULL;
    int fam = (int)family;
    h = mix(h, &fam, sizeof fam);
    h = mix(h, &hurst, sizeof hurst);
    h = mix(h, &horizon, sizeof horizon);
    if (family == KernelFamily::VolterraConcave) {
        int k = (int)gamma2.kind;
        h = mix(h, &k, sizeof k);
        h = mix(h, &gamma2.hurst, sizeof gamma2.hurst);
        h = mix(h, &gamma2.m, sizeof gamma2.m);
    }
    if (family == KernelFamily::ScaledMartingale) {
        std::uint64_t bh = base->digest();
        h = mix(h, &bh, sizeof bh);
        int k = (int)gamma.kind;
        h = mix(h, &k, sizeof k);
        h = mix(h, &gamma.c, sizeof gamma.c);
        h = mix(h, &gamma.m, sizeof gamma.m);
    }
    return h;
}

double eval_kernel(const KernelSpec& spec, double t, double s) {
    switch (spec.family) {
        case KernelFamily::FbmExact:
            throw std::domain_error(
                "eval_kernel: FbmExact is covariance-only (no usable kernel)");
        case KernelFamily::RLfBm: {
            if (s > t) return 0.0;
            double q = spec.hurst - 0.5;
            double dt = t - s;
            if (q < 0.0 && dt < 1e-12 * spec.horizon)
                throw std::domain_error(
                    "eval_kernel: RLfBm singular at t - s = " + std::to_string(dt));
            if (dt == 0.0) return q > 0.0 ? 0.0 : 1.0;  // H == 1/2 limit
            return std::pow(dt, q);
        }
        case KernelFamily::VolterraConcave: {
            if (s > t) return 0.0;
            double dt = t - s;
            if (dt < 1e-12 * spec.horizon)
                throw std::domain_error(
                    "eval_kernel: Volterra kernel singular at t - s = " +
                    std::to_string(dt));
            return std::sqrt(spec.gamma2.derivative(dt));
        }
        case KernelFamily::ScaledMartingale:
            if (s > t) return 0.0;
            return spec.gamma(s) * eval_kernel(*spec.base, t, s);
    }
    return 0.0;
}

DriverSpec DriverSpec::wiener() {
    DriverSpec d;
    d.kind = Kind::Wiener;
    return d;
}

DriverSpec DriverSpec::constant(double c, int m) {
    DriverSpec d;
    d.kind = Kind::Integrand;
    d.integrand = IntegrandKind::Constant;
    d.c = c;
    d.moment_order = 2 * m;
    return d;
}

DriverSpec DriverSpec::linear(int m) {
    DriverSpec d;
    d.kind = Kind::Integrand;
    d.integrand = IntegrandKind::Linear;
    d.moment_order = 2 * m;
    return d;
}

DriverSpec DriverSpec::sinOfDriver(int m) {
    DriverSpec d;
    d.kind = Kind::Integrand;
    d.integrand = IntegrandKind::Sin;
    d.moment_order = 2 * m;
    return d;
}

DriverSpec DriverSpec::expSquare(int m) {
    DriverSpec d;
    d.kind = Kind::Integrand;
    d.integrand = IntegrandKind::ExpSquare;
    d.moment_order = 2 * m;
    return d;
}

double DriverSpec::h(double, double w) const {
    if (kind == Kind::Wiener) return 1.0;
    switch (integrand) {
        case IntegrandKind::Constant: return c;
        case IntegrandKind::Linear: return w;
        case IntegrandKind::Sin: return std::sin(w);
        case IntegrandKind::ExpSquare: return std::exp(w * w);
    }
    return 0.0;
}

double estimateDriverMoment(const DriverSpec& driver, int m, double t,
                            int n_samples, std::uint64_t seed,
                            double* standard_error) {
    CounterRng rng(seed, RngStream::MomentProbe, 0);
    double sd = std::sqrt(t);
    double mean = 0.0, m2 = 0.0;
    for (int i = 0; i < n_samples; ++i) {
        double w = sd * rng.normal((std::uint64_t)i);
        double v = std::pow(driver.h(t, w), 2.0 * m);
        double d = v - mean;
        mean += d / (i + 1);
        m2 += d * (v - mean);
    }
    if (standard_error)
        *standard_error =
            n_samples > 1 ? std::sqrt(m2 / ((double)n_samples - 1) / n_samples)
                          : 0.0;
    return mean;
}

GammaBound gamma_bound(const DriverSpec& driver, int m) {
    if (m < 3 || m % 2 == 0)
        throw std::domain_error("gamma_bound: m must be odd and >= 3");
    GammaBound out;
    if (driver.kind == DriverSpec::Kind::Wiener) {
        out.fn = GammaScale{GammaScale::Kind::Constant, 1.0, m};
        return out;
    }
    switch (driver.integrand) {
        case DriverSpec::IntegrandKind::Constant:
            out.fn = GammaScale{GammaScale::Kind::Constant, std::abs(driver.c), m};
            return out;
        case DriverSpec::IntegrandKind::Linear: {
            // E[W_t^{2m}] = (2m-1)!! t^m
            double dfact = 1.0;
            for (int i = 2 * m - 1; i >= 2; i -= 2) dfact *= i;
            out.fn = GammaScale{GammaScale::Kind::SqrtLinear,
                                std::pow(dfact, 1.0 / (2.0 * m)), m};
            return out;
        }
        case DriverSpec::IntegrandKind::Sin:
            out.fn = GammaScale{GammaScale::Kind::SinMoment, 1.0, m};
            return out;
        case DriverSpec::IntegrandKind::ExpSquare:
            break;
    }
    // No closed form: probe the moment across growing sample sizes and
    // demand stabilization.
    double prev = 0.0;
    bool stable = false;
    double est = 0.0, se = 0.0;
    for (int n = 1 << 12; n <= (1 << 18); n <<= 1) {
        est = estimateDriverMoment(driver, m, 1.0, n, 0x9E3779B97F4A7C15ULL, &se);
        if (!std::isfinite(est)) break;
        if (n > (1 << 12) && std::abs(est - prev) < 0.05 * std::abs(est)) {
            stable = true;
            break;
        }
        prev = est;
    }
    if (!stable || !std::isfinite(est))
        throw std::runtime_error(
            "gamma_bound: 2m-th moment of the driver integrand does not "
            "stabilize (appears infinite)");
    out.exact = false;
    out.standard_error = se;
    out.fn = GammaScale{GammaScale::Kind::Constant,
                        std::pow(est, 1.0 / (2.0 * m)), m};
    return out;
}

}  // namespace powvar
