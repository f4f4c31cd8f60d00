#pragma once

#include <functional>
#include <span>
#include <vector>

#include "powvar/path_simulator.hpp"
#include "powvar/time_grid.hpp"

namespace powvar {

/// Left-endpoint Riemann sums of the eps-regularized functionals. The
/// integration range stops at horizon - step so a path never needs data
/// beyond horizon + epsilon_max; sums are Neumaier-compensated.

/// (1/eps) int_0^T (X(s+eps) - X(s))^m ds with (x)^m the odd signed power.
double odd_variation(std::span<const double> path, const TimeGrid& grid, int m,
                     double eps);

/// Same with |x|^m in place of the signed power.
double strong_variation(std::span<const double> path, const TimeGrid& grid, int m,
                        double eps);

/// (1/eps) int_0^T (X(s+eps)-X(s))^m g((X(s+eps)+X(s))/2) ds.
/// With g == 1 this reproduces odd_variation bit-for-bit.
double weighted_variation(std::span<const double> path, const TimeGrid& grid,
                          int m, double eps,
                          const std::function<double(double)>& g);

/// Symmetric ("generalized Stratonovich") integral approximation
/// (1/eps) int_0^T (X(s+eps)-X(s)) (f'(X(s+eps)) + f'(X(s)))/2 ds.
double symmetric_integral(std::span<const double> path, const TimeGrid& grid,
                          const std::function<double(double)>& fprime,
                          double eps);

/// f(X(T)) - f(X(0)) - symmetric_integral(path, f', eps).
double ito_residual(std::span<const double> path, const TimeGrid& grid,
                    const std::function<double(double)>& f,
                    const std::function<double(double)>& fprime, double eps);

struct VariationResult {
    int m = 0;
    double eps = 0.0;
    std::vector<double> per_path;
    double mc_mean = 0.0;
    double mc_second_moment = 0.0;
    double se_second_moment = 0.0;  // jackknife SE of the second moment
};

/// Per-eps odd variation of every path plus MC statistics. Reductions are
/// fixed-order pairwise over ascending path index, so repeated runs agree
/// bit-for-bit regardless of worker count.
std::vector<VariationResult> ensemble_variation(const PathEnsemble& ensemble,
                                                int m,
                                                const std::vector<double>& eps_ladder);

struct ProbeResult {
    double value = 0.0;
    double standard_error = 0.0;
};

/// Coupled-path MC estimate of E[([X,m]_eps - [X,m]_eps')^2]; both
/// functionals are evaluated on the same paths.
ProbeResult noncauchy_probe(const PathEnsemble& ensemble, int m, double eps,
                            double eps_prime);

/// CSV rows: m,eps,n_paths,mc_mean,mc_second_moment,se_second_moment
std::string variation_csv(const std::vector<VariationResult>& rows, int n_paths);

}  // namespace powvar
