#pragma once

#include <string>
#include <vector>

#include "powvar/kernel_catalog.hpp"
#include "powvar/quadrature.hpp"
#include "powvar/time_grid.hpp"

namespace powvar {

enum class ExperimentKind {
    VariationLadder,
    RateFit,
    CriticalH16,
    ItoCheck,
    Conditions,
    MartingaleCase,
    MuMass,
};

std::string to_string(ExperimentKind k);

struct Diagnostic {
    int line = 0;
    std::string field;
    std::string message;
};

struct VerdictParams {
    double expected_slope = NAN;  // NaN: no slope rule
    double slope_tol = 0.1;
    double min_r2 = 0.0;          // 0: no r2 rule
    bool require_decreasing = false;
    bool compare_exact = false;   // MC vs analytic within 3 SE
    double ratio_max = NAN;       // smallest-eps value vs largest-eps value
    double ratio_lo = 0.5;        // band for bounded, non-vanishing ladders
    double ratio_hi = 2.0;
};

struct ProbeParams {
    std::string mode = "none";  // "lower" | "upper" | "none"
    double eps = 0.0;
    double eps_prime = 0.0;
    double factor = 0.25;
};

struct ItoParams {
    std::string f = "x2";  // "x" | "x2" | "x4" | "cos"
};

struct ConditionParams {
    double a = 2.0;
    double b = 0.3;
    double c = 0.5;
    double cprime = 0.1;
    int probe_n = 96;
    bool expect_i = true;
    bool expect_ii = true;
    bool expect_iii = true;
    bool expect_concavity = true;
};

struct ExperimentConfig {
    ExperimentKind experiment = ExperimentKind::VariationLadder;
    int m = 3;
    std::uint64_t seed = 1;
    int n_paths = 0;
    std::string output_dir = "out";
    KernelSpec kernel;
    TimeGrid grid;
    std::vector<double> eps_ladder;
    QuadratureConfig quad;
    DriverSpec driver = DriverSpec::wiener();
    int inner_refine = 4;
    VerdictParams verdict;
    ProbeParams probe;
    ItoParams ito;
    ConditionParams conditions;
    int mu_grid_n = 128;
};

/// Parses the plain-text key/value format (strings, numbers, booleans,
/// [arrays], { inline tables }); unknown keys are hard errors. Returns all
/// diagnostics instead of stopping at the first.
std::vector<Diagnostic> parse_config(const std::string& text,
                                     ExperimentConfig& out);

/// Full static validation (schema plus cross-field invariants), no
/// execution. Empty result means the config is runnable.
std::vector<Diagnostic> validate_config_text(const std::string& text);

std::vector<Diagnostic> validate_config_file(const std::string& path);

/// Parse + validate; throws std::runtime_error listing the diagnostics.
ExperimentConfig load_config_file(const std::string& path);

}  // namespace powvar
