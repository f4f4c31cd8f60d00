#include <CLI11.hpp>

#include <cstdio>
#include <exception>

#include "powvar/config.hpp"
#include "powvar/experiment.hpp"

int main(int argc, char** argv) {
    CLI::App app{"powvar - regularized odd power variation laboratory"};
    app.require_subcommand(1);

    std::string run_config;
    CLI::App* run = app.add_subcommand(
        "run", "run an experiment config; exit 0 iff every verdict passes");
    run->add_option("config", run_config, "experiment config file")
        ->required()
        ->check(CLI::ExistingFile);

    std::string validate_config;
    CLI::App* validate = app.add_subcommand(
        "validate", "static validation of a config, no execution");
    validate->add_option("config", validate_config, "experiment config file")
        ->required();

    CLI::App* list = app.add_subcommand("list-experiments",
                                        "print the experiment catalog");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            powvar::ExperimentConfig cfg = powvar::load_config_file(run_config);
            powvar::ExperimentReport report = powvar::run_experiment(cfg);
            for (const auto& v : report.verdicts)
                std::printf("[%s] %s: %s\n", v.pass ? "pass" : "FAIL",
                            v.rule.c_str(), v.details.c_str());
            std::printf("report: %s/report.json\n", cfg.output_dir.c_str());
            return report.all_pass ? 0 : 1;
        }
        if (validate->parsed()) {
            auto diags = powvar::validate_config_file(validate_config);
            if (diags.empty()) {
                std::printf("ok\n");
                return 0;
            }
            for (const auto& d : diags)
                std::printf("line %d%s%s: %s\n", d.line,
                            d.field.empty() ? "" : " ",
                            d.field.c_str(), d.message.c_str());
            return 2;
        }
        if (list->parsed()) {
            for (const auto& [name, desc] : powvar::experiment_catalog())
                std::printf("%-18s %s\n", name.c_str(), desc.c_str());
            return 0;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 0;
}
