#pragma once

#include <string>
#include <vector>

#include "powvar/config.hpp"

namespace powvar {

struct Verdict {
    std::string rule;
    bool pass = false;
    std::string details;
};

struct ExperimentReport {
    std::string json;  // report.json content (schema: 1)
    bool all_pass = true;
    std::vector<Verdict> verdicts;
};

/// Runs the configured experiment, writes report.json, per-table CSVs and
/// a log-log SVG into config.output_dir, and returns the report. Outputs
/// other than wall-clock timings are deterministic in (config, seed).
ExperimentReport run_experiment(const ExperimentConfig& config);

/// Names and one-line summaries for `powvar list-experiments`.
std::vector<std::pair<std::string, std::string>> experiment_catalog();

}  // namespace powvar
