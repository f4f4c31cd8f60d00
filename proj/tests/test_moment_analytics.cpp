#include <doctest.h>

#include <cmath>
#include <vector>

#include "powvar/moment_analytics.hpp"

using namespace powvar;

TEST_CASE("hermite expansion coefficients are the exact integers") {
    MomentExpansion e1 = hermite_expand(1);
    CHECK(e1.a == std::vector<Rational>{Rational(1)});

    MomentExpansion e3 = hermite_expand(3);
    CHECK(e3.a == std::vector<Rational>{Rational(3), Rational(1)});
    CHECK(e3.c == std::vector<Rational>{Rational(9), Rational(6)});

    MomentExpansion e5 = hermite_expand(5);
    CHECK(e5.a == std::vector<Rational>{Rational(15), Rational(10), Rational(1)});
    CHECK(e5.c ==
          std::vector<Rational>{Rational(225), Rational(600), Rational(120)});

    MomentExpansion e7 = hermite_expand(7);
    CHECK(e7.a == std::vector<Rational>{Rational(105), Rational(105), Rational(21),
                                        Rational(1)});

    CHECK_THROWS_AS(hermite_expand(4), std::domain_error);
    CHECK_THROWS_AS(hermite_expand(-3), std::domain_error);
    CHECK_THROWS_AS(hermite_expand(17), std::domain_error);
}

TEST_CASE("sum a_j He_{2j+1} rebuilds x^m coefficient-wise, exactly") {
    for (int m = 1; m <= 15; m += 2) {
        MomentExpansion e = hermite_expand(m);
        std::vector<Rational> poly((std::size_t)m + 1, Rational(0));
        for (std::size_t j = 0; j < e.a.size(); ++j) {
            auto he = hermitePolynomial(2 * (int)j + 1);
            for (std::size_t p = 0; p < he.size(); ++p)
                poly[p] += e.a[j] * he[p];
        }
        for (std::size_t p = 0; p <= (std::size_t)m; ++p)
            CHECK(poly[p] == (p == (std::size_t)m ? Rational(1) : Rational(0)));
    }
}

TEST_CASE("joint moment: standardized cubic case is 6 rho^3 + 9 rho") {
    CHECK(isserlis_joint_moment(3, 0.5, 1.0, 1.0) ==
          doctest::Approx(6 * 0.125 + 9 * 0.5).epsilon(1e-15));
    CHECK(isserlis_joint_moment(3, 0.0, 1.0, 1.0) == 0.0);
    CHECK(isserlis_joint_moment(5, 0.0, 2.0, 3.0) == 0.0);
    // rho = 1 collapses to E[Z^6] = 15
    CHECK(isserlis_joint_moment(3, 1.0, 1.0, 1.0) ==
          doctest::Approx(15.0).epsilon(1e-15));
    CHECK_THROWS_AS(isserlis_joint_moment(3, 1.5, 1.0, 1.0), std::domain_error);
}

TEST_CASE("coefficient formula vs full pairing enumeration, exact rationals") {
    // rho = 1 with unit variances counts the pairings: (2m-1)!!
    CHECK(isserlisEnumeration(3, Rational(1), Rational(1), Rational(1)) ==
          Rational(15));
    CHECK(isserlisEnumeration(5, Rational(1), Rational(1), Rational(1)) ==
          Rational(945));
    CHECK(isserlisEnumeration(7, Rational(1), Rational(1), Rational(1)) ==
          Rational(135135));

    int checked = 0;
    for (int m : {3, 5, 7})
        for (long long pr : {-3LL, -1LL, 0LL, 1LL, 2LL, 3LL})
            for (long long vy : {2LL, 4LL})
                for (long long vz : {3LL, 5LL}) {
                    Rational rho(pr, 4), varY(vy, 2), varZ(vz, 2);
                    CHECK(isserlisCoefficient(m, rho, varY, varZ) ==
                          isserlisEnumeration(m, rho, varY, varZ));
                    ++checked;
                }
    CHECK(checked >= 20);
}

TEST_CASE("Brownian exact mean-square variation has the closed form") {
    // For H = 1/2, Theta(u) = (eps - u)_+ and the double integrals are
    // elementary: J0 = 3 T eps^2 - 0.6 eps^3, J1 = 9 T eps^2 - 3 eps^3.
    QuadratureConfig quad;
    CovarianceModel bm = build_model(KernelSpec::fbm(0.5, 1.0), quad);
    double eps = 1.0 / 16.0, T = 1.0;
    MsqBreakdown r = exact_msq_variation(bm, 3, eps, T, quad);
    CHECK(r.coeff[0] == 6.0);
    CHECK(r.coeff[1] == 9.0);
    CHECK(r.J[0] == doctest::Approx(3 * T * eps * eps - 0.6 * eps * eps * eps)
                        .epsilon(1e-9));
    CHECK(r.J[1] == doctest::Approx(9 * T * eps * eps - 3 * eps * eps * eps)
                        .epsilon(1e-9));
    CHECK(r.total == doctest::Approx(12 * T * eps * eps - 3.6 * eps * eps * eps)
                         .epsilon(1e-9));
}

TEST_CASE("zero process has zero mean-square variation") {
    QuadratureConfig quad;
    KernelSpec base = KernelSpec::rlfbm(0.25, 1.0);
    KernelSpec zero =
        KernelSpec::scaled(base, GammaScale{GammaScale::Kind::Constant, 0.0, 3});
    CovarianceModel model = build_model(zero, quad);
    MsqBreakdown r = exact_msq_variation(model, 3, 1.0 / 32, 1.0, quad);
    CHECK(r.total == 0.0);
}

TEST_CASE("critical fBm ladder stays within a factor two") {
    QuadratureConfig quad;
    CovarianceModel fbm16 = build_model(KernelSpec::fbm(1.0 / 6.0, 16.0), quad);
    double lo = INFINITY, hi = 0.0;
    for (int k = 5; k <= 10; ++k) {
        double v =
            exact_msq_variation(fbm16, 3, std::ldexp(1.0, -k), 16.0, quad).total;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    CHECK(lo / hi > 0.5);
}

TEST_CASE("stationary concave split: band positive, off-diagonal negative") {
    QuadratureConfig quad;
    for (double H : {1.0 / 6.0, 0.25}) {
        CovarianceModel fbm = build_model(KernelSpec::fbm(H, 1.0), quad);
        MsqBreakdown r = exact_msq_variation(fbm, 3, 1.0 / 64, 1.0, quad);
        for (std::size_t j = 0; j < r.J.size(); ++j) {
            CHECK(r.J_band[j] > 0.0);
            CHECK(r.J_off[j] <= 0.0);
            CHECK(r.J[j] >= -1e-10);
        }
    }
}

TEST_CASE("chaos variances: orthogonality against the moment expansion") {
    QuadratureConfig quad;
    for (double H : {1.0 / 6.0, 0.25, 0.4}) {
        CovarianceModel fbm = build_model(KernelSpec::fbm(H, 1.0), quad);
        for (double eps : {1.0 / 32, 1.0 / 128}) {
            ChaosVariances cv = chaos_variances_fbm(H, eps, 1.0, quad);
            double total = exact_msq_variation(fbm, 3, eps, 1.0, quad).total;
            CHECK(cv.varI1 + cv.varI3 == doctest::Approx(total).epsilon(1e-4));
        }
    }
}

TEST_CASE("critical chaos components: I1 vanishes, I3 band constant") {
    QuadratureConfig quad;
    double H = 1.0 / 6.0, T = 16.0;
    std::vector<double> ladder, i1s;
    for (int k = 4; k <= 10; ++k) {
        double eps = std::ldexp(1.0, -k);
        ladder.push_back(eps);
        i1s.push_back(chaos_variances_fbm(H, eps, T, quad).varI1);
    }
    RateFit fit = rate_fit(ladder, i1s);
    CHECK(fit.slope == doctest::Approx(2.0 / 3.0).epsilon(0.15));

    // Diagonal-band limit of varI3: (12/eps^2) int over t-s <= 2 eps of
    // (T-u) Theta^3 approaches K*T, K the 1-D profile integral below (the
    // independent oracle for the band constant).
    double eps = std::ldexp(1.0, -10);
    auto cube = [&](double r) {
        double base = std::pow(r + 1.0, 1.0 / 3.0) +
                      std::pow(std::abs(r - 1.0), 1.0 / 3.0) -
                      2.0 * std::pow(r, 1.0 / 3.0);
        return base * base * base;
    };
    double K = 1.5 * (integrateAdaptive(cube, 0.0, 1.0, quad, true, true) +
                      integrateAdaptive(cube, 1.0, 2.0, quad, true, false));
    CHECK(K == doctest::Approx(0.549847580750117).epsilon(1e-9));

    CovarianceModel fbm = build_model(KernelSpec::fbm(H, T), quad);
    auto g = [&](double u) {
        double th = theta_eps(fbm, 0.0, u, eps);
        return (T - u) * th * th * th;
    };
    double band2 = 12.0 / (eps * eps) *
                   (integrateAdaptive(g, 0.0, eps, quad, true, true) +
                    integrateAdaptive(g, eps, 2.0 * eps, quad, true, true));
    CHECK(band2 / T == doctest::Approx(K).epsilon(0.02));
}

TEST_CASE("rate_fit recovers exact power laws and validates input") {
    std::vector<double> ladder{1.0 / 16, 1.0 / 32, 1.0 / 64, 1.0 / 128, 1.0 / 256};
    std::vector<double> vals;
    for (double e : ladder) vals.push_back(e * e);
    RateFit fit = rate_fit(ladder, vals);
    CHECK(fit.slope == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(fit.r2 == doctest::Approx(1.0).epsilon(1e-12));

    CHECK_THROWS_AS(rate_fit({1.0, 0.5, 0.25}, {1.0, 1.0, 1.0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(rate_fit({1.0, 0.5, 0.25, 0.125}, {1.0, -1.0, 1.0, 1.0}),
                    std::domain_error);
}

TEST_CASE("fBm rate fits over the quadrature ladder") {
    QuadratureConfig quad;
    CovarianceModel fbm25 = build_model(KernelSpec::fbm(0.25, 16.0), quad);
    CovarianceModel fbm16 = build_model(KernelSpec::fbm(1.0 / 6.0, 16.0), quad);
    std::vector<double> ladder, v25, v16;
    for (int k = 4; k <= 10; ++k) {
        double eps = std::ldexp(1.0, -k);
        ladder.push_back(eps);
        v25.push_back(exact_msq_variation(fbm25, 3, eps, 16.0, quad).total);
        v16.push_back(exact_msq_variation(fbm16, 3, eps, 16.0, quad).total);
    }
    CHECK(rate_fit(ladder, v25).slope == doctest::Approx(0.5).epsilon(0.2));
    CHECK(std::abs(rate_fit(ladder, v16).slope) < 0.1);
}
