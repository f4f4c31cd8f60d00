#pragma once

#include <cstdint>
#include <memory>
#include <string>

namespace powvar {

enum class KernelFamily { FbmExact, RLfBm, VolterraConcave, ScaledMartingale };

std::string to_string(KernelFamily f);

/// Closed catalog of univariate gamma^2 shapes for Volterra-convolution
/// kernels. Arbitrary user functions are deliberately not accepted; a
/// tagged catalog keeps runs reproducible bit-for-bit.
struct Gamma2Spec {
    enum class Kind { Power, PowerLog };
    Kind kind = Kind::Power;
    double hurst = 0.25;  // Power: r^{2H}
    int m = 3;            // PowerLog: r^{1/(2m)} / log(1/r)

    double value(double r) const;
    double derivative(double r) const;  // d(gamma^2)/dr, r > 0
};

/// Univariate scale Gamma(t) applied to a base kernel. The closed kinds
/// mirror gamma_bound's outputs for the driver catalog.
struct GammaScale {
    enum class Kind { Constant, SqrtLinear, SinMoment };
    Kind kind = Kind::Constant;
    double c = 1.0;  // Constant: Gamma == c;  SqrtLinear: Gamma(t) = c sqrt(t)
    int m = 3;       // SinMoment: (E sin^{2m} W_t)^{1/(2m)}

    double operator()(double t) const;
};

struct KernelSpec {
    KernelFamily family = KernelFamily::FbmExact;
    double hurst = 0.5;
    double horizon = 1.0;
    Gamma2Spec gamma2;                  // VolterraConcave only
    std::shared_ptr<KernelSpec> base;   // ScaledMartingale only
    GammaScale gamma;                   // ScaledMartingale only

    static KernelSpec fbm(double hurst, double horizon);
    static KernelSpec rlfbm(double hurst, double horizon);
    static KernelSpec volterraPower(double hurst, double horizon);
    static KernelSpec volterraPowerLog(int m, double horizon);
    static KernelSpec scaled(const KernelSpec& base, const GammaScale& gamma);

    /// Throws std::invalid_argument on any violated invariant. The
    /// VolterraConcave shape check (increasing, concave, gamma^2(0+)=0) is
    /// numerical, on a log-spaced probe grid over (0, horizon].
    void validate() const;

    bool causal() const { return family != KernelFamily::FbmExact; }

    /// q such that G(t,s) ~ (t-s)^q as s -> t-. Drives the quadrature's
    /// Jacobi weight.
    double singularityExponent() const;

    /// FNV-1a digest of the canonical field encoding; identifies the model
    /// in ensemble files.
    std::uint64_t digest() const;
};

/// Pointwise kernel evaluation G(t,s) (Gamma(s)*G(t,s) for scaled kernels).
/// Causal families return 0 for s > t. FbmExact has no usable kernel and
/// always throws. Negative-exponent kernels throw std::domain_error inside
/// the guard band t - s < 1e-12 * horizon, which includes s == t.
double eval_kernel(const KernelSpec& spec, double t, double s);

struct DriverSpec {
    enum class Kind { Wiener, Integrand };
    enum class IntegrandKind { Constant, Linear, Sin, ExpSquare };

    Kind kind = Kind::Wiener;
    IntegrandKind integrand = IntegrandKind::Constant;
    double c = 1.0;        // Constant integrand value
    int moment_order = 6;  // 2m

    static DriverSpec wiener();
    static DriverSpec constant(double c, int m);
    static DriverSpec linear(int m);
    static DriverSpec sinOfDriver(int m);
    static DriverSpec expSquare(int m);

    /// h(s, w) with w the driver value at time s.
    double h(double s, double w) const;
};

struct GammaBound {
    GammaScale fn;
    bool exact = true;           // false when the MC route produced it
    double standard_error = 0.0; // MC route only
};

/// Gamma(t) = (E h^{2m}(t, W_t))^{1/(2m)}. Closed Gaussian moment
/// identities where the catalog admits them; otherwise a moment-estimation
/// probe that throws std::runtime_error when the 2m-th moment diverges.
GammaBound gamma_bound(const DriverSpec& driver, int m);

/// MC estimate of E[h^{2m}(t, W_t)] with its standard error; exposed for
/// cross-checking the closed forms and for the divergence probe.
double estimateDriverMoment(const DriverSpec& driver, int m, double t,
                            int n_samples, std::uint64_t seed,
                            double* standard_error);

}  // namespace powvar
