#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace powvar {

/// Uniform grid of n points spanning [0, horizon + epsilon_max]. Paths
/// must extend past the horizon by the largest experiment eps, and every
/// experiment eps has to be an exact multiple of the step.
struct TimeGrid {
    double horizon = 1.0;
    double epsilon_max = 0.0;
    int n = 2;

    double step() const { return (horizon + epsilon_max) / (n - 1); }
    double time(int i) const { return i * step(); }

    /// k with eps == k * step, or std::invalid_argument if off-grid.
    int indexOf(double eps) const {
        double k = eps / step();
        double r = std::round(k);
        if (!(r >= 1.0) || std::abs(k - r) > 1e-9 * std::max(1.0, k))
            throw std::invalid_argument(
                "eps = " + std::to_string(eps) +
                " is not an exact multiple of the grid step");
        return (int)r;
    }

    /// Number of grid steps covering [0, horizon].
    int horizonSteps() const {
        return (int)std::floor(horizon / step() + 1e-9);
    }

    void validate() const {
        if (n < 2) throw std::invalid_argument("TimeGrid: n must be >= 2");
        if (!(horizon > 0.0)) throw std::invalid_argument("TimeGrid: horizon <= 0");
        if (epsilon_max < 0.0)
            throw std::invalid_argument("TimeGrid: epsilon_max < 0");
        if (!(step() > 0.0)) throw std::invalid_argument("TimeGrid: step <= 0");
    }

    /// Grid with step 2^step_log2; horizon and epsilon_max must both be
    /// whole multiples of the step.
    static TimeGrid dyadic(double horizon, double epsilon_max, int step_log2) {
        double step = std::ldexp(1.0, step_log2);
        double span = horizon + epsilon_max;
        double k = span / step;
        if (std::abs(k - std::round(k)) > 1e-9 * std::max(1.0, k))
            throw std::invalid_argument(
                "TimeGrid::dyadic: span not a multiple of 2^step_log2");
        double kh = horizon / step;
        if (std::abs(kh - std::round(kh)) > 1e-9 * std::max(1.0, kh))
            throw std::invalid_argument(
                "TimeGrid::dyadic: horizon not a multiple of 2^step_log2");
        TimeGrid g{horizon, epsilon_max, (int)std::round(k) + 1};
        g.validate();
        return g;
    }
};

}  // namespace powvar
