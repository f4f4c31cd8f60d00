#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "powvar/kernel_catalog.hpp"

using namespace powvar;

TEST_CASE("pointwise kernel evaluation") {
    KernelSpec bm = KernelSpec::rlfbm(0.5, 1.0);
    CHECK(eval_kernel(bm, 1.0, 0.5) == 1.0);

    KernelSpec rl = KernelSpec::rlfbm(0.25, 1.0);
    // (t-s)^{H-1/2} = 0.25^{-1/4} = sqrt(2)
    CHECK(eval_kernel(rl, 1.0, 0.75) ==
          doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));

    // causality: strictly above the diagonal everything is 0
    KernelSpec vol = KernelSpec::volterraPower(0.25, 1.0);
    for (const KernelSpec& spec : {rl, vol}) {
        for (int i = 0; i < 64; ++i)
            for (int j = 0; j < i; ++j) {
                double s = (i + 1) / 64.0, t = (j + 1) / 64.0;  // s > t
                CHECK(eval_kernel(spec, t, s) == 0.0);
            }
    }
    CHECK(eval_kernel(rl, 0.5, 0.9) == 0.0);

    // the singular set: s == t and the guard band below it
    CHECK_THROWS_AS(eval_kernel(rl, 0.5, 0.5), std::domain_error);
    CHECK_THROWS_AS(eval_kernel(rl, 0.5, 0.5 - 1e-14), std::domain_error);
    CHECK_THROWS_AS(eval_kernel(vol, 0.5, 0.5), std::domain_error);

    // FbmExact carries no kernel at all
    KernelSpec fbm = KernelSpec::fbm(0.25, 1.0);
    CHECK_THROWS_AS(eval_kernel(fbm, 0.7, 0.3), std::domain_error);
}

TEST_CASE("scaled kernel with unit gamma equals its base bit-for-bit") {
    KernelSpec base = KernelSpec::rlfbm(0.3, 2.0);
    KernelSpec unit =
        KernelSpec::scaled(base, GammaScale{GammaScale::Kind::Constant, 1.0, 3});
    for (int i = 1; i <= 32; ++i)
        for (int j = 0; j < i; ++j) {
            double t = 2.0 * i / 32.0, s = 2.0 * j / 32.0;
            CHECK(eval_kernel(unit, t, s) == eval_kernel(base, t, s));
        }
}

TEST_CASE("spec validation") {
    CHECK_THROWS_AS(KernelSpec::fbm(0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(KernelSpec::fbm(1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(KernelSpec::rlfbm(0.5, 0.0), std::invalid_argument);

    // power gamma^2 with H <= 1/2 is concave; H > 1/2 fails the shape probe
    CHECK_NOTHROW(KernelSpec::volterraPower(0.25, 1.0));
    CHECK_THROWS_AS(KernelSpec::volterraPower(0.9, 1.0), std::invalid_argument);

    // r^{1/6}/log(1/r) is concave only below r ~ 0.12, so horizon matters
    CHECK_NOTHROW(KernelSpec::volterraPowerLog(3, 0.08));
    CHECK_THROWS_AS(KernelSpec::volterraPowerLog(3, 1.0), std::invalid_argument);

    // fbm cannot be a scaled base (no kernel)
    CHECK_THROWS_AS(
        KernelSpec::scaled(KernelSpec::fbm(0.25, 1.0),
                           GammaScale{GammaScale::Kind::Constant, 1.0, 3}),
        std::invalid_argument);
}

TEST_CASE("digest separates specs and is stable") {
    KernelSpec a = KernelSpec::rlfbm(0.25, 1.0);
    KernelSpec b = KernelSpec::rlfbm(0.3, 1.0);
    KernelSpec c = KernelSpec::fbm(0.25, 1.0);
    CHECK(a.digest() == KernelSpec::rlfbm(0.25, 1.0).digest());
    CHECK(a.digest() != b.digest());
    CHECK(a.digest() != c.digest());
}

TEST_CASE("gamma_bound closed forms") {
    // constant integrand: Gamma == |c|
    GammaBound g = gamma_bound(DriverSpec::constant(-2.5, 3), 3);
    CHECK(g.exact);
    CHECK(g.fn(0.1) == 2.5);
    CHECK(g.fn(7.0) == 2.5);

    // h(s,w) = w: Gamma(s) = ((2m-1)!!)^{1/(2m)} sqrt(s)
    GammaBound lin = gamma_bound(DriverSpec::linear(3), 3);
    double c = std::pow(15.0, 1.0 / 6.0);
    CHECK(lin.fn(2.0) == doctest::Approx(c * std::sqrt(2.0)).epsilon(1e-14));
    CHECK(lin.fn(0.0) == 0.0);

    // h = sin: Gamma <= 1 everywhere, and the closed moment matches MC
    GammaBound sb = gamma_bound(DriverSpec::sinOfDriver(3), 3);
    for (double t : {0.05, 0.3, 1.0, 4.0}) CHECK(sb.fn(t) <= 1.0);
    double se = 0.0;
    double mc = estimateDriverMoment(DriverSpec::sinOfDriver(3), 3, 1.0, 200000,
                                     99, &se);
    double closed = std::pow(sb.fn(1.0), 6.0);
    CHECK(std::abs(mc - closed) <= 4.0 * se);

    CHECK_THROWS_AS(gamma_bound(DriverSpec::linear(3), 4), std::domain_error);
    CHECK_THROWS_AS(gamma_bound(DriverSpec::linear(3), 1), std::domain_error);

    // exp(w^2) has no finite 6th moment at t = 1: the probe must refuse
    CHECK_THROWS_AS(gamma_bound(DriverSpec::expSquare(3), 3), std::runtime_error);
}

TEST_CASE("gamma2 derivative matches finite differences") {
    for (KernelSpec spec : {KernelSpec::volterraPower(0.25, 1.0),
                            KernelSpec::volterraPowerLog(3, 0.08)}) {
        for (double r : {0.003, 0.01, 0.05}) {
            double h = 1e-6 * r;
            double fd =
                (spec.gamma2.value(r + h) - spec.gamma2.value(r - h)) / (2 * h);
            CHECK(spec.gamma2.derivative(r) == doctest::Approx(fd).epsilon(1e-6));
        }
    }
}
