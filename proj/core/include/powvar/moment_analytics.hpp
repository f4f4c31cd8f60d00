#pragma once

#include <vector>

#include "powvar/covariance.hpp"
#include "powvar/quadrature.hpp"
#include "powvar/rational.hpp"

namespace powvar {

/// Odd-monomial expansion in probabilists' Hermite polynomials,
///   x^m = sum_j a[j] He_{2j+1}(x),  j = 0..(m-1)/2,
/// together with the Gaussian joint-moment coefficients
///   c[j] = (2j+1)! a[j]^2
/// so that for centered jointly Gaussian (Y, Z),
///   E[Y^m Z^m] = sum_j c[j] E[YZ]^{2j+1} (Var Y Var Z)^{(m-2j-1)/2}.
/// Everything is exact rational arithmetic.
struct MomentExpansion {
    int m = 0;
    std::vector<Rational> a;
    std::vector<Rational> c;
};

MomentExpansion hermite_expand(int m);

/// Coefficients of He_n(x) by power of x, exact.
std::vector<Rational> hermitePolynomial(int n);

/// E[Y^m Z^m] for centered jointly Gaussian (Y,Z), coefficient route.
/// Throws std::domain_error if |rho| exceeds sqrt(varY varZ) + 1e-12.
double isserlis_joint_moment(int m, double rho, double varY, double varZ);

/// Same joint moment, exact rational, coefficient route.
Rational isserlisCoefficient(int m, const Rational& rho, const Rational& varY,
                             const Rational& varZ);

/// Independent oracle: explicit sum over all perfect pairings of the 2m
/// variables. Exponential in m; fine up to m = 9.
Rational isserlisEnumeration(int m, const Rational& rho, const Rational& varY,
                             const Rational& varZ);

/// E[([X,m]_eps(T))^2] = sum_j J_j with
///   J_j = coeff_j / eps^2 * int_{[0,T]^2} Theta^{m-2j} VarInc(t)^j VarInc(s)^j,
///   coeff_j = (m-2j)! a_{m-2j}^2.
/// The (s,t) square splits at |t-s| = eps so no panel straddles the kink;
/// band/off-diagonal parts are reported separately per j.
struct MsqBreakdown {
    int m = 0;
    double eps = 0.0;
    std::vector<double> coeff;   // paper-order: coeff[j] multiplies Theta^{m-2j}
    std::vector<double> J_band;  // |t-s| <= eps contribution
    std::vector<double> J_off;   // |t-s| >  eps contribution
    std::vector<double> J;       // per-j totals
    double total = 0.0;
};

MsqBreakdown exact_msq_variation(const CovarianceModel& model, int m, double eps,
                                 double T, const QuadratureConfig& quad);

/// First/third Wiener-chaos variances of [X,3]_eps for fBm:
///   varI1 = 9 eps^{4H-2} Var[ int_T^{T+eps} X - int_0^eps X ]   (closed form)
///   varI3 = (12/eps^2) int_0^T int_0^t Theta^3                  (quadrature)
struct ChaosVariances {
    double varI1 = 0.0;
    double varI3 = 0.0;
};

ChaosVariances chaos_variances_fbm(double hurst, double eps, double T,
                                   const QuadratureConfig& quad);

struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

/// OLS of log(value) on log(eps). Requires >= 4 ladder points and strictly
/// positive values.
RateFit rate_fit(const std::vector<double>& eps_ladder,
                 const std::vector<double>& values);

}  // namespace powvar
