#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>

#include "powvar/covariance.hpp"
#include "powvar/kernel_catalog.hpp"
#include "powvar/time_grid.hpp"

namespace powvar {

/// Sample-path ensemble on a uniform grid. Column p of `values` is path p
/// (n time points down the column); the on-disk layout is path-major per
/// the PVAR1 format. All processes start at 0.
struct PathEnsemble {
    TimeGrid grid;
    Eigen::MatrixXd values;  // n x n_paths
    std::uint64_t seed = 0;
    std::uint64_t model_digest = 0;

    int nPaths() const { return (int)values.cols(); }

    /// Flat binary file: magic "PVAR1\0\0\0", grid params, n, n_paths,
    /// seed, model digest, then one 64-bit little-endian float block per
    /// path.
    void save(const std::string& path) const;
    static PathEnsemble load(const std::string& path);
};

/// Exact joint-Gaussian simulation: assemble Q on the grid, add jitter
/// eta * trace/n (eta from 1e-12, escalating x10 at most 3 times), factor,
/// and multiply standard normal vectors from the counter generator keyed
/// by (seed, path). Throws std::runtime_error naming the worst eigenvalue
/// estimate when no factorization succeeds.
PathEnsemble simulate_gaussian(const CovarianceModel& model, const TimeGrid& grid,
                               int n_paths, std::uint64_t seed);

/// Euler discretization of X(t) = int_0^t G(t,s) dM(s) against a simulated
/// martingale driver M' = h(s, W_s) dW. Driver increments are drawn once at
/// a fixed micro resolution (64 substeps per grid step) and aggregated, so
/// doubling inner_refine refines the same driver path. inner_refine must be
/// a power of two in [4, 64]. The kernel is evaluated at substep midpoints,
/// which keeps the singular endpoint out of the sum.
PathEnsemble simulate_martingale_volterra(const KernelSpec& kernel,
                                          const DriverSpec& driver,
                                          const TimeGrid& grid, int inner_refine,
                                          int n_paths, std::uint64_t seed);

}  // namespace powvar
