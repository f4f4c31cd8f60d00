#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "powvar/kernel_catalog.hpp"
#include "powvar/quadrature.hpp"

namespace powvar {

/// All second-order structure of a process: covariance Q(s,t), squared
/// canonical metric delta^2(s,t), and a univariate delta^2(r). FbmExact is
/// closed-form; kernel families integrate G(t,u)G(s,u) with a Gauss-Jacobi
/// panel absorbing the endpoint singularity. Immutable after build, safe
/// for concurrent reads.
class CovarianceModel {
public:
    const KernelSpec& spec() const { return spec_; }
    double horizon() const { return spec_.horizon; }
    bool stationaryIncrements() const { return stationary_; }

    double Q(double s, double t) const;
    double delta2(double s, double t) const;

    /// Stationary models: the exact univariate metric. Non-stationary
    /// kernels: sup_s delta^2(s, s+r), attained at s = horizon - r for
    /// every family in the catalog; VolterraConcave uses the dominating
    /// envelope 2 gamma^2(r).
    double delta2Univ(double r) const;

    int panelNodes() const { return panel_nodes_; }

private:
    friend CovarianceModel build_model(const KernelSpec&, const QuadratureConfig&);

    double kernelProductIntegral(double s, double t, int nodes) const;

    KernelSpec spec_;
    QuadratureConfig quad_;
    bool stationary_ = true;
    int panel_nodes_ = 24;
};

/// Validates the quadrature scheme on probe points (node doubling must
/// move Q by less than quad.rel_tol) before freezing the per-evaluation
/// rule. Throws QuadratureError if refinement never stabilizes.
CovarianceModel build_model(const KernelSpec& spec, const QuadratureConfig& quad);

/// Theta^eps(s,t) = E[(X_{t+eps}-X_t)(X_{s+eps}-X_s)], evaluated as minus
/// half the planar increment of delta^2 with compensated summation;
/// stationary models use the univariate closed form.
double theta_eps(const CovarianceModel& model, double s, double t, double eps);

struct MuMassResult {
    double mass = 0.0;      // last refinement level
    double previous = 0.0;  // level before it
    bool converged = true;  // false: refinement had not stabilized
    int grid_n = 0;         // cells per side at the last level
};

/// |mu|(OD_eps) for mu = d^2(delta^2)/ds dt: total variation of the cell
/// increments of delta^2 over cells lying entirely in
/// {0 <= s <= t - eps <= T}, refined until stable.
MuMassResult mu_offdiagonal_mass(const CovarianceModel& model, double eps,
                                 int grid_n);

struct ConditionReport {
    std::string condition;  // "i" | "ii" | "iii" | "concavity"
    std::map<std::string, double> params;
    double worst_margin = 0.0;
    bool holds = false;
    int probe_count = 0;

    std::string to_json() const;
};

/// Coercivity / strengthened-concavity checks behind the first-order Ito
/// formula, on log-spaced probes eps0 < u < v <= min(1, T):
///   (i)   c delta^2(u) <= Q(u,u)
///   (ii)  c' delta^2(u) delta^2(v-u) <= Q(u,u)Q(v,v) - Q(u,v)^2
///   (iii) (delta(au) - delta(u)) / ((a-1)u) < b delta(u)/u
/// Failures are reported, never thrown. Margins are signed, inequality
/// satisfied iff margin is positive; equalities at the working precision
/// (|margin| <= 1e-12 * scale) count as holding.
std::vector<ConditionReport> check_conditions(const CovarianceModel& model,
                                              double a, double b, double c,
                                              double cprime, int probe_n);

/// Increasing + concave probe for a univariate delta^2 candidate on a
/// uniform grid over [r_lo, r_hi].
ConditionReport check_concavity(const std::function<double(double)>& delta2_univ,
                                double r_lo, double r_hi, int probe_n);

}  // namespace powvar
