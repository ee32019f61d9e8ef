#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "lie_reach/cli.hpp"

int main(int argc, char **argv)
{
    auto logger = spdlog::stderr_color_mt("reach");
    logger->set_pattern("[%l] %v");
    spdlog::set_default_logger(logger);
    spdlog::set_level(lie_reach::cli::log_level_from_env());

    CLI::App app{"Interval reachability on matrix Lie groups"};
    app.require_subcommand(1);

    std::string config;
    std::string out;
    auto *run = app.add_subcommand("run", "Compute a reach tube");
    run->add_option("--config", config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    run->add_option("--out", out, "Tube output file (JSONL)")->required();

    std::string tube;
    lie_reach::ValidationOptions opts;
    auto *validate = app.add_subcommand("validate", "Monte Carlo containment check of a tube");
    validate->add_option("--tube", tube, "Tube file written by `run`")->required()->check(CLI::ExistingFile);
    validate->add_option("--config", config, "Experiment config used for the tube")
        ->required()
        ->check(CLI::ExistingFile);
    validate->add_option("--samples", opts.uniform_samples, "Uniform initial samples")
        ->required()
        ->check(CLI::NonNegativeNumber);
    validate->add_option("--seed", opts.seed, "RNG seed")->required();
    validate->add_option("--out", out, "Report output file (JSON)")->required();
    validate->add_option("--meshgrid", opts.meshgrid_k, "Extra k^n meshgrid samples (0 = none)")
        ->check(CLI::NonNegativeNumber);
    validate->add_option("--checkpoints", opts.checkpoints, "Reported checkpoints (0 = every entry)")
        ->check(CLI::NonNegativeNumber);
    validate->add_option("--substeps", opts.substeps, "Reference steps per tube step")->check(CLI::PositiveNumber);

    int repeats = 0;
    auto *bench = app.add_subcommand("bench", "Time the reach computation");
    bench->add_option("--config", config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    bench->add_option("--repeats", repeats, "Number of sequential repeats (>= 3)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : lie_reach::cli::kUsage;
    }

    try {
        if (*run) return lie_reach::cli::cmd_run(config, out);
        if (*validate) {
            if (opts.meshgrid_k == 1) {
                spdlog::error("--meshgrid needs k >= 2");
                return lie_reach::cli::kUsage;
            }
            return lie_reach::cli::cmd_validate(tube, config, opts, out);
        }
        if (*bench) return lie_reach::cli::cmd_bench(config, repeats, std::cout);
    } catch (const std::exception &e) {
        spdlog::error("{}", e.what());
        return lie_reach::cli::kUsage;
    }
    return lie_reach::cli::kUsage;
}
