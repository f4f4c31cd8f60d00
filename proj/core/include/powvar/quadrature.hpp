#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace powvar {

struct QuadratureConfig {
    int nodes = 32;           // Gauss nodes per panel at the base level
    int max_refinements = 10; // node-doubling passes before giving up
    double rel_tol = 1e-7;    // refinement stop: |change| <= rel_tol * scale
};

/// Thrown when node doubling stops improving; carries the last two
/// refinement values so the caller can see how close the run got.
class QuadratureError : public std::runtime_error {
public:
    QuadratureError(const std::string& what, double last, double previous)
        : std::runtime_error(what + " (last=" + std::to_string(last) +
                             ", previous=" + std::to_string(previous) + ")"),
          last_value(last), previous_value(previous) {}
    double last_value;
    double previous_value;
};

struct GaussRule {
    std::vector<double> x;  // nodes on [-1, 1]
    std::vector<double> w;
};

/// Gauss-Legendre rule, cached per node count.
const GaussRule& gaussLegendre(int n);

/// Gauss-Jacobi rule for weight (1-x)^alpha (1+x)^beta on [-1,1]
/// (Golub-Welsch), cached per (n, alpha, beta).
const GaussRule& gaussJacobi(int n, double alpha, double beta);

using Integrand = std::function<double(double)>;

double integrateGL(const Integrand& f, double a, double b, int nodes);

/// \int_a^b (x-a)^beta f(x) dx with beta > -1; the weight carries the
/// endpoint singularity so f only needs to be smooth.
double integratePowerLeft(const Integrand& f, double a, double b, double beta,
                          int nodes);

/// Panel-adaptive integration of a bounded integrand whose derivatives may
/// blow up at a flagged endpoint (|x-a|^gamma kinks and the like). Dyadic
/// panels accumulate toward flagged ends; nodes double until the value is
/// stable to cfg.rel_tol or max_refinements is exhausted. scale_hint
/// widens the convergence scale so integrals that are exactly zero up to
/// round-off (relative to a known companion quantity) terminate.
double integrateAdaptive(const Integrand& f, double a, double b,
                         const QuadratureConfig& cfg, bool kink_left,
                         bool kink_right, double scale_hint = 0.0);

}  // namespace powvar
