#include "powvar/variation.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "powvar/parallel.hpp"
#include "powvar/summation.hpp"

namespace powvar {

namespace {

double signedPow(double x, int m) {
    double r = x;
    for (int i = 1; i < m; ++i) r *= x;
    return r;  // odd m: sign of x survives exactly
}

void checkOdd(int m) {
    if (m < 1 || m % 2 == 0)
        throw std::domain_error("variation: m must be a positive odd integer");
}

// Shared Riemann-sum core: sum_{t_i <= T-step} term(i, i+k) * step / eps.
template <typename Term>
double regularizedSum(std::span<const double> path, const TimeGrid& grid,
                      double eps, Term term) {
    int k = grid.indexOf(eps);
    int count = grid.horizonSteps();
    if (count - 1 + k >= (int)path.size())
        throw std::invalid_argument(
            "variation: path does not cover horizon + eps");
    Accumulator acc;
    for (int i = 0; i < count; ++i) acc.add(term(i, i + k));
    return acc.value() * (grid.step() / eps);
}

}  // namespace

double odd_variation(std::span<const double> path, const TimeGrid& grid, int m,
                     double eps) {
    checkOdd(m);
    return regularizedSum(path, grid, eps, [&](int i, int j) {
        return signedPow(path[j] - path[i], m) * 1.0;
    });
}

double strong_variation(std::span<const double> path, const TimeGrid& grid, int m,
                        double eps) {
    checkOdd(m);
    return regularizedSum(path, grid, eps, [&](int i, int j) {
        return std::abs(signedPow(path[j] - path[i], m));
    });
}

double weighted_variation(std::span<const double> path, const TimeGrid& grid,
                          int m, double eps,
                          const std::function<double(double)>& g) {
    checkOdd(m);
    return regularizedSum(path, grid, eps, [&](int i, int j) {
        return signedPow(path[j] - path[i], m) * g(0.5 * (path[j] + path[i]));
    });
}

double symmetric_integral(std::span<const double> path, const TimeGrid& grid,
                          const std::function<double(double)>& fprime,
                          double eps) {
    return regularizedSum(path, grid, eps, [&](int i, int j) {
        return (path[j] - path[i]) * (0.5 * (fprime(path[j]) + fprime(path[i])));
    });
}

double ito_residual(std::span<const double> path, const TimeGrid& grid,
                    const std::function<double(double)>& f,
                    const std::function<double(double)>& fprime, double eps) {
    int iT = grid.horizonSteps();
    Accumulator acc;
    acc.add(f(path[(std::size_t)iT]));
    acc.add(-f(path[0]));
    acc.add(-symmetric_integral(path, grid, fprime, eps));
    return acc.value();
}

std::vector<VariationResult> ensemble_variation(const PathEnsemble& ensemble,
                                                int m,
                                                const std::vector<double>& eps_ladder) {
    checkOdd(m);
    int n_paths = ensemble.nPaths();
    if (n_paths < 1) throw std::invalid_argument("ensemble_variation: empty ensemble");
    std::vector<VariationResult> out(eps_ladder.size());
    for (std::size_t e = 0; e < eps_ladder.size(); ++e) {
        out[e].m = m;
        out[e].eps = eps_ladder[e];
        ensemble.grid.indexOf(eps_ladder[e]);  // alignment check up front
        out[e].per_path.resize((std::size_t)n_paths);
    }
    parallelFor((std::size_t)n_paths, [&](std::size_t p) {
        std::span<const double> path(ensemble.values.col((Eigen::Index)p).data(),
                                     (std::size_t)ensemble.grid.n);
        for (std::size_t e = 0; e < eps_ladder.size(); ++e)
            out[e].per_path[p] =
                odd_variation(path, ensemble.grid, m, eps_ladder[e]);
    });
    for (auto& r : out) {
        const auto& y = r.per_path;
        std::size_t n = y.size();
        r.mc_mean = pairwiseSum(y) / (double)n;
        double m2 =
            pairwiseSum([&](std::size_t i) { return y[i] * y[i]; }, 0, n) /
            (double)n;
        r.mc_second_moment = m2;
        if (n > 1) {
            double ss = pairwiseSum(
                [&](std::size_t i) {
                    double d = y[i] * y[i] - m2;
                    return d * d;
                },
                0, n);
            r.se_second_moment = std::sqrt(ss / ((double)n * (double)(n - 1)));
        }
    }
    return out;
}

ProbeResult noncauchy_probe(const PathEnsemble& ensemble, int m, double eps,
                            double eps_prime) {
    checkOdd(m);
    int n_paths = ensemble.nPaths();
    std::vector<double> d2((std::size_t)n_paths);
    parallelFor((std::size_t)n_paths, [&](std::size_t p) {
        std::span<const double> path(ensemble.values.col((Eigen::Index)p).data(),
                                     (std::size_t)ensemble.grid.n);
        double a = odd_variation(path, ensemble.grid, m, eps);
        double b = odd_variation(path, ensemble.grid, m, eps_prime);
        double d = a - b;
        d2[p] = d * d;
    });
    ProbeResult r;
    std::size_t n = d2.size();
    r.value = pairwiseSum(d2) / (double)n;
    if (n > 1) {
        double ss = pairwiseSum(
            [&](std::size_t i) {
                double d = d2[i] - r.value;
                return d * d;
            },
            0, n);
        r.standard_error = std::sqrt(ss / ((double)n * (double)(n - 1)));
    }
    return r;
}

std::string variation_csv(const std::vector<VariationResult>& rows, int n_paths) {
    std::string csv = "m,eps,n_paths,mc_mean,mc_second_moment,se_second_moment\n";
    char buf[256];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%d,%.17g,%d,%.17g,%.17g,%.17g\n", r.m,
                      r.eps, n_paths, r.mc_mean, r.mc_second_moment,
                      r.se_second_moment);
        csv += buf;
    }
    return csv;
}

}  // namespace powvar
